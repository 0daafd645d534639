#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <string>
#include <vector>

#include "magnifier/graph.hpp"
#include "magnifier/limitlaw.hpp"
#include "magnifier/localization.hpp"
#include "magnifier/rw.hpp"
#include "magnifier/spectral.hpp"
#include "magnifier/szegedy.hpp"

// Invariant suites behind the `verify` command. Each check reports its
// worst deviation against its tolerance; the corrupt-coin hook perturbs one
// coin entry so the unitarity checks must fail (a negative control).

namespace magnifier {

struct CheckResult {
  std::string name;
  double max_dev;
  double tol;
  bool pass;
};

struct VerifyOptions {
  bool corrupt_coin = false;
  int kgrid = 100;
  int quad_points = 1 << 15;
  double tol_unitarity = 1e-12;
  double tol_specmap = 1e-10;
  double tol_eigenrel = 1e-12;
  double tol_derivative = 1e-6;
  double tol_gamma = 1e-8;
  double tol_mass = 1e-6;
  double tol_pushforward = 1e-3;
};

namespace detail {

inline Matrix6d verify_coin(const RWParams& params, const VerifyOptions& opt) {
  Matrix6d C = coin_operator(params);
  if (opt.corrupt_coin) C(0, 0) += 1e-3;
  return C;
}

} // namespace detail

/// Grover rule fidelity: the six basis-state images at (1/2,1/2,2/3) carry
/// exactly the coefficients {1, -1/3, 2/3}. Runs on the fixed Grover
/// parameters regardless of the parameters under test.
inline CheckResult check_grover_rules(const VerifyOptions& opt) {
  const RWParams grover(0.5, 0.5, 2.0 / 3.0);
  const Matrix6d C = detail::verify_coin(grover, opt);
  const Window w(-2, 2);
  double dev = 0.0;

  struct Expect {
    Arc from;
    std::vector<std::tuple<std::int64_t, Arc, double>> to;
  };
  const double th = 1.0 / 3.0;
  const std::vector<Expect> rules = {
      {Arc::E0, {{0, Arc::E0Bar, 1.0}}},
      {Arc::EPlus, {{0, Arc::EMinusBar, 1.0}}},
      {Arc::EMinus, {{-1, Arc::EPlusBar, 1.0}}},
      {Arc::E0Bar, {{0, Arc::E0, -th}, {0, Arc::EPlus, 2 * th}, {0, Arc::EMinus, 2 * th}}},
      {Arc::EPlusBar, {{0, Arc::E0, 2 * th}, {0, Arc::EPlus, -th}, {0, Arc::EMinus, 2 * th}}},
      {Arc::EMinusBar, {{1, Arc::E0, 2 * th}, {1, Arc::EPlus, 2 * th}, {1, Arc::EMinus, -th}}},
  };
  for (const auto& rule : rules) {
    // one step assembled from the (possibly corrupted) coin blocks
    StateVector in = basis_state(w, 0, rule.from);
    StateVector shifted(w);
    for (std::int64_t j = w.jmin; j <= w.jmax; ++j) {
      for (Arc a : all_arcs()) {
        const SitePosition rev = reverse(SitePosition{j, a});
        if (w.contains(rev.cell)) shifted.at(j, a) = in.at(rev.cell, rev.arc);
      }
    }
    StateVector out(w);
    for (std::int64_t j = w.jmin; j <= w.jmax; ++j) {
      for (Arc a : all_arcs()) {
        std::complex<double> acc = 0.0;
        for (Arc f : all_arcs()) {
          if (origin(f) != origin(a)) continue;
          acc += C(arc_index(a), arc_index(f)) * shifted.at(j, f);
        }
        out.at(j, a) = acc;
      }
    }
    StateVector expect(w);
    for (const auto& [cell, arc, coeff] : rule.to) expect.at(cell, arc) = coeff;
    dev = std::max(dev, (out.amp - expect.amp).lpNorm<Eigen::Infinity>());
  }
  return {"grover_rules", dev, 1e-15, dev <= 1e-15};
}

/// Fiber unitarity over a k-grid plus the reflection property coin^2 = I.
inline CheckResult check_unitarity(const RWParams& params, const VerifyOptions& opt) {
  const Matrix6d C = detail::verify_coin(params, opt);
  double dev = (C * C - Matrix6d::Identity()).cwiseAbs().maxCoeff();
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int m = 0; m < opt.kgrid; ++m) {
    const double k = 2.0 * M_PI * m / opt.kgrid;
    const Matrix6cd U = C * twisted_shift(k);
    dev = std::max(dev, (U.adjoint() * U - Matrix6cd::Identity()).cwiseAbs().maxCoeff());
    Vector6cd psi;
    for (int i = 0; i < 6; ++i) psi(i) = std::complex<double>(unif(rng), unif(rng));
    psi.normalize();
    dev = std::max(dev, std::abs((U * psi).norm() - 1.0));
  }
  return {"unitarity", dev, opt.tol_unitarity, dev <= opt.tol_unitarity};
}

/// Reversibility: p(e) m(o(e)) = p(reverse e) m(t(e)) on a test window.
inline CheckResult check_detailed_balance(const RWParams& params, const VerifyOptions& opt) {
  double dev = 0.0;
  for (std::int64_t j = -3; j <= 3; ++j) {
    for (Arc a : all_arcs()) {
      const SitePosition pos{j, a};
      const auto ends = lifted_endpoints(pos);
      const SitePosition rev = reverse(pos);
      const double lhs = transition_prob(params, a) *
                         reversible_measure(params, ends.origin.cell, ends.origin.vertex);
      const double rhs = transition_prob(params, rev.arc) *
                         reversible_measure(params, ends.terminal.cell, ends.terminal.vertex);
      const double scale = std::max(1.0, std::max(std::abs(lhs), std::abs(rhs)));
      dev = std::max(dev, std::abs(lhs - rhs) / scale);
    }
  }
  return {"detailed_balance", dev, opt.tol_unitarity, dev <= opt.tol_unitarity};
}

/// J_k is Hermitian with eigenvalues {0, +-sqrt(a + b cos k)}; the
/// numerical eigensolver must agree with the closed form on the k-grid.
inline CheckResult check_twisted_spectrum(const RWParams& params, const VerifyOptions& opt) {
  double dev = 0.0;
  for (int m = 0; m < opt.kgrid; ++m) {
    const double k = 2.0 * M_PI * m / opt.kgrid;
    const Eigen::Matrix3cd J = twisted_matrix(params, k);
    dev = std::max(dev, (J - J.adjoint()).cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> solver(J);
    const auto expected = twisted_matrix_spectrum(params, k);
    for (int i = 0; i < 3; ++i) {
      dev = std::max(dev, std::abs(solver.eigenvalues()(i) - expected[i]));
    }
  }
  return {"twisted_spectrum", dev, opt.tol_specmap, dev <= opt.tol_specmap};
}

inline CheckResult check_spectral_mapping(const RWParams& params, const VerifyOptions& opt) {
  if (opt.corrupt_coin) {
    // assemble from the corrupted coin so the negative control reaches here too
    double dev = 0.0;
    const Matrix6d C = detail::verify_coin(params, opt);
    for (int m = 0; m < opt.kgrid; ++m) {
      const double k = 2.0 * M_PI * m / opt.kgrid;
      Eigen::ComplexEigenSolver<Matrix6cd> solver(C * twisted_shift(k), false);
      std::array<std::complex<double>, 6> got;
      for (int i = 0; i < 6; ++i) got[i] = solver.eigenvalues()(i);
      dev = std::max(dev, spectrum_set_distance(got, expected_fiber_spectrum(params, k)));
    }
    return {"spectral_mapping", dev, opt.tol_specmap, dev <= opt.tol_specmap};
  }
  const auto report = spectral_map_check(params, opt.kgrid, opt.tol_specmap);
  return {"spectral_mapping", report.max_dev, opt.tol_specmap, report.pass};
}

/// U w(p_j) = i w(p_j) and the conjugate relation, via the real-space step.
inline CheckResult check_eigen_relations(const RWParams& params, const VerifyOptions& opt) {
  double dev = 0.0;
  const std::complex<double> i01(0.0, 1.0);
  for (std::int64_t j : {-1, 0, 5}) {
    const RoundTripVector v = detail::make_round_trip(params, j);
    const Window w(j - 2, j + 3);
    const StateVector s = v.as_state(w);
    dev = std::max(dev, (step(params, s).amp - i01 * s.amp).norm() / s.amp.norm());
    StateVector sc(w);
    sc.amp = s.amp.conjugate();
    dev = std::max(dev, (step(params, sc).amp + i01 * sc.amp).norm() / sc.amp.norm());
  }
  return {"eigen_relations", dev, opt.tol_eigenrel, dev <= opt.tol_eigenrel};
}

/// Gram structure of the round-trip family: adjacent overlap exactly b,
/// no overlap beyond one cell, and L+ orthogonal to L-.
inline CheckResult check_gram_structure(const RWParams& params, const VerifyOptions& opt) {
  const Window w(-4, 6);
  const auto gram = round_trip_gram(params);
  const auto w0 = detail::make_round_trip(params, 0).as_state(w);
  const auto w1 = detail::make_round_trip(params, 1).as_state(w);
  const auto w2 = detail::make_round_trip(params, 2).as_state(w);
  double dev = std::abs(w0.amp.dot(w1.amp) - std::complex<double>(gram.off_diagonal));
  dev = std::max(dev, std::abs(w0.amp.dot(w2.amp)));
  dev = std::max(dev, std::abs(w0.amp.squaredNorm() - gram.diagonal));
  for (const auto& other : {w0, w1, w2}) {
    dev = std::max(dev, std::abs(w0.amp.dot(other.amp.conjugate())));
  }
  return {"gram_structure", dev, opt.tol_eigenrel, dev <= opt.tol_eigenrel};
}

/// Projections onto L+- are idempotent, mutually orthogonal, and contract.
inline CheckResult check_projections(const RWParams& params, const VerifyOptions& opt) {
  const Window w(-8, 8);
  std::mt19937 rng(777);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  double dev = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    StateVector psi(w);
    for (Eigen::Index i = 0; i < psi.amp.size(); ++i) {
      psi.amp(i) = std::complex<double>(unif(rng), unif(rng));
    }
    psi.amp.normalize();
    auto [plus, minus] = project_localized(params, psi);
    auto [pp, pm] = project_localized(params, plus);
    dev = std::max(dev, (pp.amp - plus.amp).norm());
    dev = std::max(dev, pm.amp.norm()); // Pi- Pi+ = 0
    const double np = plus.amp.squaredNorm(), nm = minus.amp.squaredNorm();
    dev = std::max(dev, std::max(0.0, np + nm - 1.0));
    // self-adjointness: <psi, Pi+ psi> = ||Pi+ psi||^2 must be real positive
    dev = std::max(dev, std::abs(psi.amp.dot(plus.amp) - std::complex<double>(np)));
  }
  return {"projections", dev, opt.tol_eigenrel * 100, dev <= opt.tol_eigenrel * 100};
}

/// Closed-form band derivatives against centered finite differences, and
/// sup |nu'| against kappa.
inline CheckResult check_band_derivatives(const RWParams& params, const VerifyOptions& opt) {
  const BandFunction band(params);
  const double h = 1e-4;
  double dev = 0.0;
  for (int i = 1; i < 60; ++i) {
    const double k = 0.1 + (M_PI - 0.2) * i / 60.0;
    const double fd1 = (band.nu(k + h) - band.nu(k - h)) / (2.0 * h);
    const double fd2 = (band.nu(k + h) - 2.0 * band.nu(k) + band.nu(k - h)) / (h * h);
    dev = std::max(dev, std::abs(band.dnu(k) - fd1) / std::max(1.0, std::abs(fd1)));
    dev = std::max(dev, std::abs(band.d2nu(k) - fd2) / std::max(1.0, std::abs(fd2)));
  }
  double sup = 0.0;
  for (int i = 0; i < 200001; ++i) {
    const double k = 1e-6 + (M_PI - 2e-6) * i / 200000.0;
    sup = std::max(sup, std::abs(band.dnu(k)));
  }
  dev = std::max(dev, std::abs(sup - band.spectral().kappa));
  return {"band_derivatives", dev, opt.tol_derivative, dev <= opt.tol_derivative};
}

/// Branch-sum identity between the displayed Jacobian forms:
/// sum_pm 2 sqrt(H_pm)/((1-4x^2) sqrt(phi)) =
/// 2 (gamma_+ + gamma_-) 2 lambda0/((1-4x^2) sqrt(u)); plus the recurrent
/// collapse gamma_+ == 1, gamma_- == 0 when p = q.
inline CheckResult check_gamma_identities(const RWParams& params, const VerifyOptions& opt) {
  const LimitLawParams lp = limit_law_params(params);
  double dev = 0.0;
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    const double x = lp.kappa * (-1.0 + 2.0 * (i + 0.5) / n);
    const double sphi = std::sqrt(phi(lp, x));
    const double pref = 1.0 - 4.0 * x * x;
    const double lhs = 2.0 * (std::sqrt(big_h(lp, x, +1)) + std::sqrt(big_h(lp, x, -1))) /
                       (pref * sphi);
    const auto [gp, gm] = gamma_weights(lp, x);
    const double rhs =
        2.0 * (gp + gm) * 2.0 * lp.lambda0 / (pref * std::sqrt(u_factor(lp, x)));
    dev = std::max(dev, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
    const auto [gp2, gm2] = gamma_weights(lp, -x);
    dev = std::max(dev, std::abs(gp - gp2) + std::abs(gm - gm2));
    if (is_recurrent(params)) {
      dev = std::max(dev, std::abs(gp - 1.0));
      dev = std::max(dev, std::abs(gm));
    }
  }
  return {"gamma_identities", dev, opt.tol_gamma, dev <= opt.tol_gamma};
}

/// Total limit-law mass: the raw pushforward density integrates to one, so
/// atom + calibrated continuous part is one and the calibration constant
/// stays within quadrature error of 2/3.
inline CheckResult check_total_mass(const RWParams& params, const VerifyOptions& opt) {
  const LimitLaw law(params, opt.quad_points);
  double dev = std::abs(law.raw_integral() - 1.0);
  dev = std::max(dev, std::abs(law.cdf(law.kappa() + 1.0) - 1.0));
  dev = std::max(dev, std::abs(law.cdf(0.0) - law.cdf(-0.0) - 0.0)); // right-continuity guard
  return {"total_mass", dev, opt.tol_mass, dev <= opt.tol_mass};
}

/// Real-space and Fourier-side characteristic functions agree.
inline CheckResult check_char_fn(const RWParams& params, const VerifyOptions& opt) {
  const std::int64_t n = 6;
  const Distribution dist = ensemble_distribution(params, n);
  double dev = 0.0;
  for (double xi : {0.1, 0.5, 1.0}) {
    dev = std::max(dev, std::abs(char_fn(dist, xi) - fourier_char_fn(params, n, xi, 4096)));
  }
  return {"char_fn_consistency", dev, 1e-8, dev <= 1e-8};
}

/// The swapped triple (q,p,r) has the same lambdas and the same density.
inline CheckResult check_equivalence_class(const RWParams& params, const VerifyOptions& opt) {
  const RWParams swapped(params.q, params.p, params.r);
  const LimitLaw a(params, opt.quad_points);
  const LimitLaw b(swapped, opt.quad_points);
  double dev = std::abs(a.derived().lambda0 - b.derived().lambda0);
  dev = std::max(dev, std::abs(a.derived().lambda1 - b.derived().lambda1));
  for (int i = 1; i < 200; ++i) {
    const double x = a.kappa() * (-1.0 + 2.0 * i / 200.0);
    dev = std::max(dev, std::abs(a.density(x) - b.density(x)));
  }
  return {"equivalence_class", dev, 1e-10, dev <= 1e-10};
}

/// Band pushforward construction against the calibrated CDF.
inline CheckResult check_band_pushforward(const RWParams& params, const VerifyOptions& opt) {
  const LimitLaw law(params, opt.quad_points);
  const double dev = band_pushforward_max_dev(params, law);
  return {"band_pushforward", dev, opt.tol_pushforward, dev <= opt.tol_pushforward};
}

/// Norm drift and light cone over a medium horizon.
inline CheckResult check_evolution(const RWParams& params, const VerifyOptions& opt) {
  const std::int64_t n = 200;
  const Window w = run_window(n);
  double dev = 0.0;
  StateVector psi = basis_state(w, 0, Arc::E0Bar);
  for (std::int64_t s = 0; s < n; ++s) psi = step(params, psi);
  dev = std::max(dev, std::abs(psi.norm() - 1.0));
  const Distribution d = distribution(psi);
  double outside = 0.0;
  for (std::int64_t c = 0; c < d.window.cell_count(); ++c) {
    const std::int64_t j = d.window.jmin + c;
    if (j < -n || j > n + 1) outside += d.mass(c);
  }
  dev = std::max(dev, outside);
  return {"evolution_norm_lightcone", dev, 1e-10, dev <= 1e-10};
}

inline std::vector<CheckResult> run_verification(const RWParams& params,
                                                 const VerifyOptions& opt = {}) {
  std::vector<CheckResult> results;
  results.push_back(check_grover_rules(opt));
  results.push_back(check_unitarity(params, opt));
  results.push_back(check_detailed_balance(params, opt));
  results.push_back(check_twisted_spectrum(params, opt));
  results.push_back(check_spectral_mapping(params, opt));
  results.push_back(check_eigen_relations(params, opt));
  results.push_back(check_gram_structure(params, opt));
  results.push_back(check_projections(params, opt));
  results.push_back(check_band_derivatives(params, opt));
  results.push_back(check_gamma_identities(params, opt));
  results.push_back(check_total_mass(params, opt));
  results.push_back(check_char_fn(params, opt));
  results.push_back(check_equivalence_class(params, opt));
  results.push_back(check_band_pushforward(params, opt));
  results.push_back(check_evolution(params, opt));
  return results;
}

} // namespace magnifier
