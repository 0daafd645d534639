#include <catch_amalgamated.hpp>

#include <random>

#include "magnifier/graph.hpp"
#include "magnifier/rw.hpp"

using namespace magnifier;
using Catch::Matchers::WithinAbs;

namespace {
const RWParams kGrover(0.5, 0.5, 2.0 / 3.0);
const RWParams kDrifted(0.7, 0.3, 0.5);

std::vector<RWParams> random_triples(int count, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(0.05, 0.95);
  std::vector<RWParams> out;
  for (int i = 0; i < count; ++i) out.emplace_back(unif(rng), unif(rng), unif(rng));
  return out;
}
} // namespace

TEST_CASE("parameters outside (0,1) are rejected") {
  CHECK_THROWS_AS(RWParams(0.0, 0.5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(RWParams(0.5, 1.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(RWParams(0.5, 0.5, -0.1), std::invalid_argument);
}

TEST_CASE("transition probabilities") {
  CHECK(transition_prob(kDrifted, Arc::E0Bar) == 1.0);
  CHECK_THAT(transition_prob(kDrifted, Arc::EPlus), WithinAbs(0.35, 1e-15));
  CHECK_THAT(transition_prob(RWParams(0.5, 0.5, 2.0 / 3.0), Arc::EPlus),
             WithinAbs(1.0 / 3.0, 1e-15));

  for (const auto& params : random_triples(10, 11)) {
    for (Vertex v : {Vertex::R, Vertex::S, Vertex::T}) {
      double sum = 0.0;
      for (Arc a : all_arcs()) {
        if (origin(a) == v) sum += transition_prob(params, a);
      }
      CHECK_THAT(sum, WithinAbs(1.0, 1e-14));
    }
  }
}

TEST_CASE("reversible measure values and detailed balance") {
  CHECK_THAT(reversible_measure(kGrover, 3, Vertex::S), WithinAbs(1.0, 1e-14));
  CHECK_THAT(reversible_measure(kDrifted, 1, Vertex::S), WithinAbs(49.0 / 9.0, 1e-12));
  CHECK_THAT(reversible_measure(kDrifted, 0, Vertex::R), WithinAbs(0.5, 1e-15));

  for (const auto& params : random_triples(10, 22)) {
    for (std::int64_t j = -4; j <= 4; ++j) {
      for (Arc a : all_arcs()) {
        const SitePosition pos{j, a};
        const auto ends = lifted_endpoints(pos);
        const SitePosition rev = reverse(pos);
        const double lhs = transition_prob(params, a) *
                           reversible_measure(params, ends.origin.cell, ends.origin.vertex);
        const double rhs = transition_prob(params, rev.arc) *
                           reversible_measure(params, ends.terminal.cell, ends.terminal.vertex);
        CHECK_THAT(lhs / rhs, WithinAbs(1.0, 1e-12));
      }
    }
  }
}

TEST_CASE("twisted matrix is Hermitian with the closed-form spectrum") {
  // Grover at k=0: the (S,T)-entry is 2 sqrt(1/6)
  const auto j0 = twisted_matrix(kGrover, 0.0);
  CHECK_THAT(j0(1, 2).real(), WithinAbs(2.0 * std::sqrt(1.0 / 6.0), 1e-15));
  CHECK_THAT(j0(1, 2).imag(), WithinAbs(0.0, 1e-15));
  CHECK((j0 - j0.adjoint()).cwiseAbs().maxCoeff() == 0.0);

  for (const auto& params : random_triples(10, 33)) {
    for (int m = 0; m < 100; ++m) {
      const double k = 2.0 * M_PI * m / 100;
      const auto J = twisted_matrix(params, k);
      CHECK((J - J.adjoint()).cwiseAbs().maxCoeff() < 1e-16);
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> solver(J);
      const auto expected = twisted_matrix_spectrum(params, k);
      for (int i = 0; i < 3; ++i) {
        CHECK_THAT(solver.eigenvalues()(i), WithinAbs(expected[i], 1e-10));
      }
    }
  }
}

TEST_CASE("closed-form spectral parameters") {
  SECTION("Grover point") {
    const SpectralParams s = spectral_params(kGrover);
    CHECK_THAT(s.lambda0, WithinAbs(1.0 / std::sqrt(3.0), 1e-15));
    CHECK_THAT(s.lambda1, WithinAbs(1.0, 1e-15));
    CHECK_THAT(s.kappa, WithinAbs(1.0 / std::sqrt(6.0), 1e-13));
  }
  SECTION("drifted point") {
    const SpectralParams s = spectral_params(kDrifted);
    CHECK_THAT(s.a, WithinAbs(0.71, 1e-15));
    CHECK_THAT(s.b, WithinAbs(0.21, 1e-15));
    CHECK_THAT(s.lambda0, WithinAbs(0.7071067811865476, 1e-14));
    CHECK_THAT(s.lambda1, WithinAbs(0.9591663046625438, 1e-14));
    CHECK_THAT(s.kappa, WithinAbs(0.23911649915626326, 1e-13));
  }
  SECTION("p+q=1 gives lambda0^2 = 1-r") {
    const RWParams params(0.62, 0.38, 0.47);
    const SpectralParams s = spectral_params(params);
    CHECK_THAT(s.lambda0 * s.lambda0, WithinAbs(1.0 - params.r, 1e-14));
  }
  SECTION("ordering, bounds, swap symmetry") {
    for (const auto& params : random_triples(20, 44)) {
      const SpectralParams s = spectral_params(params);
      CHECK(s.lambda0 <= s.lambda1);
      CHECK(s.lambda1 <= 1.0);
      CHECK(s.lambda0 * s.lambda0 >= 1.0 - params.r - 1e-14);
      const SpectralParams sw = spectral_params(RWParams(params.q, params.p, params.r));
      CHECK(s.a == sw.a);
      CHECK(s.b == sw.b);
      CHECK((s.lambda1 == 1.0) == is_recurrent(params));
    }
  }
}

TEST_CASE("recurrence classification") {
  CHECK(is_recurrent(kGrover));
  CHECK_FALSE(is_recurrent(kDrifted));
  CHECK(is_recurrent(RWParams(0.4, 0.4, 0.9)));
}

TEST_CASE("power iteration approaches lambda1") {
  const Window big(-200, 200);
  const double grover = rw_power_iterate(kGrover, big, 2000, 1e-8);
  CHECK_THAT(grover, WithinAbs(1.0, 1e-3));
  const double drifted = rw_power_iterate(kDrifted, big, 2000, 1e-8);
  CHECK_THAT(drifted, WithinAbs(0.9591663046625438, 1e-3));

  // a principal submatrix bounds the spectrum from below
  const double tiny = rw_power_iterate(kGrover, Window(0, 0), 500, 1e-10);
  CHECK(tiny < 1.0);

  CHECK_THROWS_AS(rw_power_iterate(kGrover, big, 3, 1e-14), ConvergenceError);
}
