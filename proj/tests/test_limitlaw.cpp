#include <catch_amalgamated.hpp>

#include <cmath>

#include "magnifier/limitlaw.hpp"

using namespace magnifier;
using Catch::Matchers::WithinAbs;

namespace {
const RWParams kGrover(0.5, 0.5, 2.0 / 3.0);
const RWParams kDrifted(0.7, 0.3, 0.5);

// RHS of the cos(2nu) relation: f(t) = (1-2a+t)(1-2b+t)/(4(t^2-1))
double f_higuchi(double t, double alpha, double beta) {
  return 0.25 * (1.0 - 2.0 * alpha + t) * (1.0 - 2.0 * beta + t) / (t * t - 1.0);
}

double bisect_dnu(const BandFunction& band, double lo, double hi, double target) {
  auto g = [&](double k) { return band.dnu(k) - target; };
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (g(lo) * g(mid) <= 0.0) hi = mid; else lo = mid;
  }
  return 0.5 * (lo + hi);
}
} // namespace

TEST_CASE("Konno density and CDF") {
  const double k0 = std::sqrt(2.0 / 3.0);
  CHECK_THAT(konno_density(0.0, k0), WithinAbs(0.22507907903927654, 1e-15));
  CHECK(konno_density(0.9, k0) == 0.0);
  CHECK(konno_density(-0.9, k0) == 0.0);
  CHECK_THROWS_AS(konno_density(k0, k0), std::domain_error);
  CHECK_THROWS_AS(konno_density(0.0, 1.5), std::domain_error);

  // unit mass by endpoint-avoiding quadrature, x = k0 sin t
  const int n = 200000;
  double mass = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = -M_PI / 2.0 + (i + 0.5) * M_PI / n;
    mass += konno_density(k0 * std::sin(t), k0) * k0 * std::cos(t) * (M_PI / n);
  }
  CHECK_THAT(mass, WithinAbs(1.0, 1e-6));

  CHECK(konno_cdf(-1.0, k0) == 0.0);
  CHECK(konno_cdf(1.0, k0) == 1.0);
  CHECK_THAT(konno_cdf(0.0, k0), WithinAbs(0.5, 1e-15));
  // CDF differentiates back to the density
  const double x = 0.31, h = 1e-6;
  CHECK_THAT((konno_cdf(x + h, k0) - konno_cdf(x - h, k0)) / (2 * h),
             WithinAbs(konno_density(x, k0), 1e-6));
}

TEST_CASE("phi: displayed quartic, stable product form, endpoints") {
  for (const RWParams& params : {kGrover, kDrifted}) {
    const LimitLawParams lp = limit_law_params(params);
    CHECK_THAT(phi(lp, lp.kappa), WithinAbs(0.0, 1e-15));
    CHECK_THAT(phi(lp, -lp.kappa), WithinAbs(0.0, 1e-15));
    CHECK_THAT(phi(lp, 0.0), WithinAbs((lp.alpha - lp.beta) * (lp.alpha - lp.beta), 1e-14));
    for (int i = 0; i < 500; ++i) {
      const double x = lp.kappa * (-1.0 + 2.0 * (i + 0.5) / 500);
      CHECK(phi(lp, x) >= 0.0);
      CHECK_THAT(phi(lp, x), WithinAbs(phi_display(x, lp.alpha, lp.beta), 1e-12));
    }
  }
  const LimitLawParams lp = limit_law_params(kDrifted);
  CHECK_THAT(lp.kappa, WithinAbs(0.23911649915626326, 1e-15));
  CHECK_THAT(lp.x2, WithinAbs(0.4391164991562634, 1e-15));
  CHECK_THAT(phi(lp, 0.1), WithinAbs(0.138, 1e-15));
}

TEST_CASE("H branches") {
  const LimitLawParams lpg = limit_law_params(kGrover);
  CHECK_THAT(big_h(lpg, 0.0, +1), WithinAbs(8.0 / 9.0, 1e-14));
  CHECK_THAT(big_h(lpg, 0.0, -1), WithinAbs(0.0, 1e-14));

  const LimitLawParams lp = limit_law_params(kDrifted);
  CHECK_THAT(big_h(lp, 0.1, +1), WithinAbs(0.9192461504329128, 1e-13));
  CHECK_THAT(big_h(lp, 0.1, -1), WithinAbs(0.2951538495670875, 1e-13));
  CHECK_THAT(big_h(lp, 0.0, +1), WithinAbs(4.0 * lp.beta * (1.0 - lp.beta), 1e-13));
  CHECK_THAT(big_h(lp, 0.0, -1), WithinAbs(4.0 * lp.alpha * (1.0 - lp.alpha), 1e-13));

  for (const LimitLawParams& d : {lpg, lp}) {
    for (int i = 0; i < 200; ++i) {
      const double x = d.kappa * (-1.0 + 2.0 * (i + 0.5) / 200);
      // the +- terms cancel in the sum
      const double sum_display =
          16.0 * (-1.0 + (1.0 - d.alpha) * d.beta + (1.0 - d.beta) * d.alpha) * x * x +
          4.0 * (d.alpha * (1.0 - d.alpha) + d.beta * (1.0 - d.beta));
      CHECK_THAT(big_h(d, x, +1) + big_h(d, x, -1), WithinAbs(sum_display, 1e-13));
      // even in x
      CHECK(big_h(d, x, +1) == big_h(d, -x, +1));
      // denested square roots match the displayed values
      const auto [shp, shm] = sqrt_h_pair(d, x);
      CHECK_THAT(shp * shp, WithinAbs(big_h(d, x, +1), 1e-12));
      CHECK_THAT(shm * shm, WithinAbs(big_h(d, x, -1), 1e-12));
    }
  }
}

TEST_CASE("cos(2nu) branches") {
  const LimitLawParams lp = limit_law_params(kDrifted);
  SECTION("values at x = 0") {
    const auto [hp, hm] = h_branches(lp, 0.0);
    CHECK_THAT(hp, WithinAbs(2.0 * lp.beta - 1.0, 1e-14));
    CHECK_THAT(hm, WithinAbs(2.0 * lp.alpha - 1.0, 1e-14));
  }
  SECTION("both branches invert the x^2(cos 2nu) relation") {
    for (double x : {0.03, 0.1, 0.2}) {
      const auto [hp, hm] = h_branches(lp, x);
      CHECK_THAT(f_higuchi(hp, lp.alpha, lp.beta), WithinAbs(x * x, 1e-13));
      CHECK_THAT(f_higuchi(hm, lp.alpha, lp.beta), WithinAbs(x * x, 1e-13));
      CHECK(hp >= 2.0 * lp.beta - 1.0 - 1e-12);
      CHECK(hm <= 2.0 * lp.alpha - 1.0 + 1e-12);
    }
  }
  SECTION("recurrent case: the minus branch collapses to cos 0 = 1") {
    const LimitLawParams lpg = limit_law_params(kGrover);
    for (double x : {0.05, 0.2, 0.35}) {
      const auto [hp, hm] = h_branches(lpg, x);
      CHECK_THAT(hm, WithinAbs(1.0, 1e-13));
      CHECK(hp < 1.0 - 1e-3);
    }
  }
  SECTION("domain") {
    CHECK_THROWS_AS(h_branches(lp, lp.kappa), std::domain_error);
    CHECK_THROWS_AS(h_branches(lp, 0.9), std::domain_error);
  }
}

TEST_CASE("branch weights gamma") {
  SECTION("frozen transient values") {
    const LimitLawParams lp = limit_law_params(kDrifted);
    const auto [gp, gm] = gamma_weights(lp, 0.1);
    CHECK_THAT(gp, WithinAbs(1.2377709470609608, 1e-12));
    CHECK_THAT(gm, WithinAbs(0.7013722853177279, 1e-12));
  }
  SECTION("recurrent: gamma+ = 1, gamma- = 0 identically") {
    const LimitLawParams lp = limit_law_params(kGrover);
    for (int i = 0; i < 1000; ++i) {
      const double x = lp.kappa * (-1.0 + 2.0 * (i + 0.5) / 1000);
      const auto [gp, gm] = gamma_weights(lp, x);
      CHECK_THAT(gp, WithinAbs(1.0, 1e-10));
      CHECK_THAT(gm, WithinAbs(0.0, 1e-10));
    }
  }
  SECTION("even in x") {
    const LimitLawParams lp = limit_law_params(kDrifted);
    for (double x : {0.02, 0.11, 0.2}) {
      const auto [gp, gm] = gamma_weights(lp, x);
      const auto [gp2, gm2] = gamma_weights(lp, -x);
      CHECK(gp == gp2);
      CHECK(gm == gm2);
    }
  }
  SECTION("branch-sum identity against the displayed Jacobian forms") {
    for (const RWParams& params : {kGrover, kDrifted, RWParams(0.23, 0.81, 0.4)}) {
      const LimitLawParams lp = limit_law_params(params);
      for (int i = 0; i < 1000; ++i) {
        const double x = lp.kappa * (-1.0 + 2.0 * (i + 0.5) / 1000);
        const double pref = 1.0 - 4.0 * x * x;
        const double lhs =
            2.0 * (std::sqrt(big_h(lp, x, +1)) + std::sqrt(big_h(lp, x, -1))) /
            (pref * std::sqrt(phi(lp, x)));
        const auto [gp, gm] = gamma_weights(lp, x);
        const double rhs =
            2.0 * (gp + gm) * 2.0 * lp.lambda0 / (pref * std::sqrt(u_factor(lp, x)));
        CHECK_THAT(lhs, WithinAbs(rhs, 1e-8 * std::max(1.0, std::abs(lhs))));
      }
    }
  }
}

TEST_CASE("Jacobian forms match the band function at the nu' preimages") {
  // independent route: solve nu'(k) = x by bisection, evaluate 1/|nu''| from
  // the closed-form band derivatives, and compare with the H-branch forms
  const LimitLawParams lp = limit_law_params(kDrifted);
  const BandFunction band(kDrifted);
  // nu' rises from 0 to its max kappa at k*, then falls back to 0 at pi
  double kstar = 0.0, best = 0.0;
  for (int i = 1; i < 5000; ++i) {
    const double k = M_PI * i / 5000;
    if (std::abs(band.dnu(k)) > best) { best = std::abs(band.dnu(k)); kstar = k; }
  }
  for (double x : {0.05, 0.11, 0.2}) {
    const double k_rise = bisect_dnu(band, 1e-9, kstar, x);
    const double k_fall = bisect_dnu(band, kstar, M_PI - 1e-9, x);
    const double pref = 1.0 - 4.0 * x * x;
    const double sphi = std::sqrt(phi(lp, x));
    const auto [hp, hm] = h_branches(lp, x);
    for (double k : {k_rise, k_fall}) {
      const double inv = 1.0 / std::abs(band.d2nu(k));
      const double c2 = std::cos(2.0 * band.nu(k));
      const double expected = std::abs(c2 - hp) < std::abs(c2 - hm)
                                  ? 2.0 * std::sqrt(big_h(lp, x, +1)) / (pref * sphi)
                                  : 2.0 * std::sqrt(big_h(lp, x, -1)) / (pref * sphi);
      CHECK_THAT(inv, WithinAbs(expected, 1e-6 * expected));
    }
  }
}

TEST_CASE("calibrated limit law") {
  SECTION("raw pushforward integrates to one; calibration is 2/3") {
    for (const RWParams& params : {kGrover, kDrifted}) {
      const LimitLaw law(params);
      CHECK_THAT(law.raw_integral(), WithinAbs(1.0, 1e-6));
      CHECK_THAT(law.calibration(), WithinAbs(2.0 / 3.0, 1e-6));
      CHECK_THAT(law.cdf(law.kappa() + 1e-9), WithinAbs(1.0, 1e-6));
      CHECK(law.cdf(-law.kappa() - 1e-9) == 0.0);
      CHECK_THAT(law.cdf(-1e-12), WithinAbs(1.0 / 3.0, 1e-6));
      CHECK_THAT(law.cdf(0.0) - law.cdf(-1e-12), WithinAbs(1.0 / 3.0, 1e-6));
    }
  }
  SECTION("Grover: the continuous wave is the doubled, squeezed Konno density") {
    const LimitLaw law(kGrover);
    const double k0 = std::sqrt(2.0 / 3.0);
    for (int i = 0; i < 999; ++i) {
      const double x = law.kappa() * (-1.0 + 2.0 * (i + 0.5) / 999);
      CHECK_THAT(law.density(x), WithinAbs((2.0 / 3.0) * 2.0 * konno_density(2.0 * x, k0),
                                           1e-8));
      CHECK(law.rho_star(x) <= 1e-12);
    }
    for (double x : {-0.5, -0.25, -0.05, 0.0, 0.1, 0.3, 0.5}) {
      CHECK_THAT(law.cdf(x), WithinAbs(recurrent_limit_cdf(kGrover, x), 1e-6));
    }
    CHECK_THROWS_AS(law.density(law.kappa()), std::domain_error);
  }
  SECTION("transient case carries a second wave") {
    const LimitLaw law(kDrifted);
    CHECK_THAT(law.density(0.1), WithinAbs((2.0 / 3.0) * 1.3406791801728843, 1e-9));
    CHECK_THAT(law.rho_star(0.1), WithinAbs((2.0 / 3.0) * 0.4849127206154325, 1e-9));
    CHECK(law.rho_star(0.1) > 0.1);
    // density is even
    for (double x : {0.03, 0.1, 0.2}) CHECK(law.density(x) == law.density(-x));
  }
  SECTION("equivalence class (p,q,r) ~ (q,p,r)") {
    const LimitLaw a(kDrifted);
    const LimitLaw b(RWParams(0.3, 0.7, 0.5));
    CHECK(a.derived().lambda0 == b.derived().lambda0);
    CHECK(a.derived().lambda1 == b.derived().lambda1);
    for (int i = 0; i < 500; ++i) {
      const double x = a.kappa() * (-1.0 + 2.0 * (i + 0.5) / 500);
      CHECK_THAT(a.density(x), WithinAbs(b.density(x), 1e-10));
    }
  }
  SECTION("r at the lattice limit is refused") {
    CHECK_THROWS_AS(LimitLaw(RWParams(0.3, 0.4, 1.0 - 1e-10)), std::invalid_argument);
  }
}

TEST_CASE("KS distance and empirical pseudo velocity") {
  SECTION("the exact discretization of the law scores near zero") {
    const LimitLaw law(kDrifted);
    const std::int64_t n = 2000;
    Distribution d{Window(-n - 2, n + 2)};
    double prev = 0.0;
    for (std::int64_t j = -n - 2; j <= n + 2; ++j) {
      const double f = law.cdf(static_cast<double>(j) / n);
      d.mass(j + n + 2) = f - prev;
      prev = f;
    }
    CHECK_THAT(d.total(), WithinAbs(1.0, 1e-9));
    CHECK(ks_distance(d, n, law) < 1e-9);
    CHECK_THAT(pseudo_velocity_empirical(d, n, 1e-3), WithinAbs(law.kappa(), 0.02));
  }
  SECTION("band pushforward construction agrees with the calibrated CDF") {
    for (const RWParams& params : {kGrover, kDrifted}) {
      const LimitLaw law(params);
      CHECK(band_pushforward_max_dev(params, law) < 1e-3);
    }
  }
}
