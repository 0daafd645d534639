#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "magnifier/errors.hpp"
#include "magnifier/graph.hpp"

// The drifted random walk on G and its spectral data. The walk leaves S
// along e0/e+/e- with probabilities 1-r, rp, r(1-p), leaves T along
// eb+/eb- with probabilities q, 1-q, and leaves R deterministically along
// eb0. It is reversible; the symmetrized operator J has purely closed-form
// spectrum [-lambda1,-lambda0] u {0} u [lambda0,lambda1].

namespace magnifier {

/// Parameters (p,q,r) of the drifted walk, each strictly inside (0,1).
struct RWParams {
  double p;
  double q;
  double r;

  RWParams(double p_, double q_, double r_) : p(p_), q(q_), r(r_) {
    validate();
  }

  void validate() const {
    auto check = [](double v, const char* nm) {
      if (!(v > 0.0) || !(v < 1.0)) {
        throw std::invalid_argument(std::string("RWParams: ") + nm +
                                    " must lie strictly in (0,1), got " + std::to_string(v));
      }
    };
    check(p, "p");
    check(q, "q");
    check(r, "r");
  }
};

/// |p - q| below this means the walk is treated as recurrent (lambda1 = 1).
inline constexpr double kRecurrenceTol = 1e-12;

/// Transition probability along one quotient arc.
inline double transition_prob(const RWParams& params, Arc a) {
  switch (a) {
    case Arc::E0: return 1.0 - params.r;
    case Arc::EPlus: return params.r * params.p;
    case Arc::EMinus: return params.r * (1.0 - params.p);
    case Arc::E0Bar: return 1.0;
    case Arc::EPlusBar: return params.q;
    default: return 1.0 - params.q;
  }
}

/// Reversible measure m on V(G): m((j,S)) = (p(1-q)/((1-p)q))^j,
/// m((j,T)) = (rp/q) m((j,S)), m((j,R)) = (1-r) m((j,S)).
inline double reversible_measure(const RWParams& params, std::int64_t cell, Vertex v) {
  const double ratio = params.p * (1.0 - params.q) / ((1.0 - params.p) * params.q);
  const double ms = std::pow(ratio, static_cast<double>(cell));
  switch (v) {
    case Vertex::S: return ms;
    case Vertex::T: return params.r * params.p / params.q * ms;
    default: return (1.0 - params.r) * ms;
  }
}

/// Fourier fiber J_k of the symmetrized walk operator, indexed (R,S,T).
/// Hermitian for every k; spec(J_k) = {0, +-sqrt(a + b cos k)}.
inline Eigen::Matrix3cd twisted_matrix(const RWParams& params, double k) {
  using std::sqrt;
  const double p = params.p, q = params.q, r = params.r;
  Eigen::Matrix3cd J = Eigen::Matrix3cd::Zero();
  const std::complex<double> st =
      sqrt(r * (1.0 - p) * (1.0 - q)) * std::polar(1.0, k) + sqrt(r * p * q);
  J(0, 1) = J(1, 0) = sqrt(1.0 - r);
  J(1, 2) = st;
  J(2, 1) = std::conj(st);
  return J;
}

/// Closed-form spectral quantities of the symmetrized walk operator.
struct SpectralParams {
  double a;       // 1 - r(p(1-q) + q(1-p))
  double b;       // 2 r sqrt(pq(1-p)(1-q))
  double lambda0; // sqrt(a - b), bottom of |spec| \ {0}
  double lambda1; // sqrt(a + b), top of |spec|
  double theta0;  // arccos lambda0
  double theta1;  // arccos lambda1
  double kappa;   // (1/2) sin(theta0 - theta1), the pseudo velocity
};

inline SpectralParams spectral_params(const RWParams& params) {
  const double p = params.p, q = params.q, r = params.r;
  SpectralParams s;
  s.a = 1.0 - r * (p * (1.0 - q) + q * (1.0 - p));
  s.b = 2.0 * r * std::sqrt(p * q * (1.0 - p) * (1.0 - q));
  // a+b can exceed 1 by rounding when p = q; clamp before the arccos.
  s.lambda1 = std::sqrt(std::min(s.a + s.b, 1.0));
  s.lambda0 = std::sqrt(s.a - s.b);
  s.theta0 = std::acos(std::min(s.lambda0, 1.0));
  s.theta1 = std::acos(s.lambda1);
  s.kappa = 0.5 * std::sin(s.theta0 - s.theta1);
  return s;
}

/// Recurrence of the walk on G; equivalent to p = q and to lambda1 = 1.
inline bool is_recurrent(const RWParams& params) {
  return std::abs(params.p - params.q) < kRecurrenceTol;
}

/// Eigenvalues {0, +-sqrt(a + b cos k)} of J_k from the characteristic
/// polynomial; the Hermitian eigensolver cross-checks this in tests.
inline std::array<double, 3> twisted_matrix_spectrum(const RWParams& params, double k) {
  const SpectralParams s = spectral_params(params);
  const double lam = std::sqrt(s.a + s.b * std::cos(k));
  return {-lam, 0.0, lam};
}

/// Power-method estimate of sup|spec(J)| on a finite window of cells.
/// Iterates J^2 via its Rayleigh quotient; the estimate converges to
/// lambda1 from below as window and step budget grow.
inline double rw_power_iterate(const RWParams& params, const Window& window, int max_steps,
                               double tol = 1e-8) {
  const double p = params.p, q = params.q, r = params.r;
  const double cRS = std::sqrt(1.0 - r);
  const double cST = std::sqrt(r * p * q);             // same-cell S-T coupling
  const double cSTm = std::sqrt(r * (1.0 - p) * (1.0 - q)); // cell-crossing coupling
  const auto n = window.cell_count();

  // vertex layout: 3 per cell, order (R,S,T)
  Eigen::VectorXd v = Eigen::VectorXd::Constant(3 * n, 1.0 / std::sqrt(3.0 * double(n)));
  Eigen::VectorXd w(3 * n);
  auto apply = [&](const Eigen::VectorXd& src, Eigen::VectorXd& dst) {
    for (std::int64_t c = 0; c < n; ++c) {
      const auto R = 3 * c, S = 3 * c + 1, T = 3 * c + 2;
      dst[R] = cRS * src[S];
      dst[S] = cRS * src[R] + cST * src[T] + (c > 0 ? cSTm * src[T - 3] : 0.0);
      dst[T] = cST * src[S] + (c + 1 < n ? cSTm * src[S + 3] : 0.0);
    }
  };

  double est = 0.0;
  for (int it = 0; it < max_steps; ++it) {
    apply(v, w);
    const double nw = w.norm();
    if (nw == 0.0) throw ConvergenceError("rw_power_iterate: iterate vanished");
    const double next = nw / v.norm();
    v = w / nw;
    if (it > 0 && std::abs(next - est) < tol) return next;
    est = next;
  }
  if (tol <= 0.0) return est;
  throw ConvergenceError("rw_power_iterate: no convergence within " +
                         std::to_string(max_steps) + " steps");
}

} // namespace magnifier
