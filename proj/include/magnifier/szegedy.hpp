#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "magnifier/errors.hpp"
#include "magnifier/graph.hpp"
#include "magnifier/rw.hpp"
#include "magnifier/spectral.hpp"

// Exact real-space evolution on a finite window. One step shifts every
// amplitude along its reversed arc (the e-/eb- pair moves one cell) and then
// applies the coin at each vertex, reproducing the evolution rules of the
// walk exactly; for (p,q,r) = (1/2,1/2,2/3) the images of the six basis
// states carry the coefficients {1, -1/3, 2/3}.

namespace magnifier {

/// Complex amplitude field over window cells x six arcs.
struct StateVector {
  Window window;
  Eigen::VectorXcd amp;

  StateVector() : window(0, 0), amp(Eigen::VectorXcd::Zero(kArcCount)) {}
  explicit StateVector(const Window& w) : window(w), amp(Eigen::VectorXcd::Zero(w.dimension())) {}

  std::complex<double>& at(std::int64_t cell, Arc a) {
    return amp(flat_index({cell, a}, window));
  }
  std::complex<double> at(std::int64_t cell, Arc a) const {
    return amp(flat_index({cell, a}, window));
  }

  double norm() const { return amp.norm(); }
};

/// Unit basis state delta_{(cell, arc)}.
inline StateVector basis_state(const Window& w, std::int64_t cell, Arc a) {
  StateVector s(w);
  s.at(cell, a) = 1.0;
  return s;
}

namespace detail {

/// Coin blocks by origin vertex, as dense per-cell 3x3 / 2x2 / 1x1 pieces.
struct CoinBlocks {
  Eigen::Matrix3d s_block;  // arcs (e0, e+, e-) at S
  Eigen::Matrix2d t_block;  // arcs (eb+, eb-) at T
  double r_block;           // arc (eb0) at R

  explicit CoinBlocks(const RWParams& params) {
    const Matrix6d C = coin_operator(params);
    s_block = C.block<3, 3>(0, 0);
    t_block = C.block<2, 2>(4, 4);
    r_block = C(3, 3);
  }
};

} // namespace detail

/// One step of the walk. Throws WindowOverflowError if the support already
/// touches the boundary cells (a step would push amplitude off the window;
/// amplitude is never silently truncated).
inline StateVector step(const RWParams& params, const StateVector& state) {
  const Window& w = state.window;
  const auto n = w.cell_count();
  const auto* in = state.amp.data();

  auto cell_occupied = [&](std::int64_t c) {
    for (int a = 0; a < kArcCount; ++a) {
      if (in[c * kArcCount + a] != std::complex<double>(0.0, 0.0)) return true;
    }
    return false;
  };
  if (cell_occupied(0) || (n > 1 && cell_occupied(n - 1))) {
    throw WindowOverflowError("step: support touches window boundary; enlarge the window");
  }

  const detail::CoinBlocks coin(params);
  StateVector out(w);
  auto* o = out.amp.data();
  constexpr int E0 = 0, EP = 1, EM = 2, B0 = 3, BP = 4, BM = 5;
  for (std::int64_t c = 0; c < n; ++c) {
    const auto base = c * kArcCount;
    // arc reversal with the e-/eb- cell shift
    const std::complex<double> sE0 = in[base + B0];
    const std::complex<double> sB0 = in[base + E0];
    const std::complex<double> sEP = in[base + BP];
    const std::complex<double> sBP = in[base + EP];
    const std::complex<double> sEM = c > 0 ? in[base - kArcCount + BM] : 0.0;
    const std::complex<double> sBM = c + 1 < n ? in[base + kArcCount + EM] : 0.0;
    // coin at the arrival vertex
    o[base + E0] = coin.s_block(0, 0) * sE0 + coin.s_block(0, 1) * sEP + coin.s_block(0, 2) * sEM;
    o[base + EP] = coin.s_block(1, 0) * sE0 + coin.s_block(1, 1) * sEP + coin.s_block(1, 2) * sEM;
    o[base + EM] = coin.s_block(2, 0) * sE0 + coin.s_block(2, 1) * sEP + coin.s_block(2, 2) * sEM;
    o[base + B0] = coin.r_block * sB0;
    o[base + BP] = coin.t_block(0, 0) * sBP + coin.t_block(0, 1) * sBM;
    o[base + BM] = coin.t_block(1, 0) * sBP + coin.t_block(1, 1) * sBM;
  }
  return out;
}

/// n applications of step.
inline StateVector evolve(const RWParams& params, StateVector state, std::int64_t steps) {
  for (std::int64_t i = 0; i < steps; ++i) state = step(params, state);
  return state;
}

/// Per-cell probability masses of a state.
struct Distribution {
  Window window;
  Eigen::VectorXd mass;

  Distribution() : window(0, 0), mass(Eigen::VectorXd::Zero(1)) {}
  explicit Distribution(const Window& w)
      : window(w), mass(Eigen::VectorXd::Zero(w.cell_count())) {}

  double at(std::int64_t cell) const {
    return window.contains(cell) ? mass(cell - window.jmin) : 0.0;
  }
  double total() const { return mass.sum(); }
};

inline Distribution distribution(const StateVector& state) {
  Distribution d(state.window);
  const auto n = state.window.cell_count();
  for (std::int64_t c = 0; c < n; ++c) {
    d.mass(c) = state.amp.segment(c * kArcCount, kArcCount).squaredNorm();
  }
  return d;
}

/// The mixed initial state: the six arc basis states at cell 0, weight 1/6
/// each, mixed classically (distributions averaged, not amplitudes).
struct InitialEnsemble {
  static constexpr double weight = 1.0 / 6.0;
};

/// Window [-n-2, n+2], one spare cell beyond the light cone on each side.
inline Window run_window(std::int64_t steps) { return Window(-steps - 2, steps + 2); }

/// Distribution of the mixed ensemble after n steps on a caller-chosen
/// window (which must out-run the light cone, or stepping overflows).
inline Distribution ensemble_distribution(const RWParams& params, std::int64_t steps,
                                          const Window& w) {
  Distribution acc(w);
  for (Arc a : all_arcs()) {
    const Distribution d = distribution(evolve(params, basis_state(w, 0, a), steps));
    acc.mass += InitialEnsemble::weight * d.mass;
  }
  return acc;
}

inline Distribution ensemble_distribution(const RWParams& params, std::int64_t steps) {
  return ensemble_distribution(params, steps, run_window(steps));
}

/// E[X^order] of a distribution over cell indices.
inline double moments(const Distribution& dist, int order) {
  double acc = 0.0;
  for (std::int64_t c = 0; c < dist.window.cell_count(); ++c) {
    acc += std::pow(static_cast<double>(dist.window.jmin + c), order) * dist.mass(c);
  }
  return acc;
}

/// E[e^{i xi X}] of a distribution over cell indices.
inline std::complex<double> char_fn(const Distribution& dist, double xi) {
  std::complex<double> acc = 0.0;
  for (std::int64_t c = 0; c < dist.window.cell_count(); ++c) {
    acc += dist.mass(c) * std::polar(1.0, xi * static_cast<double>(dist.window.jmin + c));
  }
  return acc;
}

/// Characteristic function of X_n for the mixed ensemble, evaluated on the
/// Fourier side: E[e^{i xi X_n}] = int <Psi_n(k), Psi_n(k+xi)> dk/2pi with
/// Psi_n(k) = U_k^n Psi_0. Uniform trapezoid quadrature; the integrand is a
/// trigonometric polynomial of degree <= 2(n+1), so any grid larger than
/// that is exact up to rounding.
inline std::complex<double> fourier_char_fn(const RWParams& params, std::int64_t steps,
                                            double xi, int grid = 4096) {
  if (grid < 16) throw std::invalid_argument("fourier_char_fn: quadrature grid too small");
  const Matrix6d C = coin_operator(params);
  std::complex<double> acc = 0.0;
  for (int m = 0; m < grid; ++m) {
    const double k = 2.0 * M_PI * m / grid;
    const Matrix6cd U1 = C * twisted_shift(k);
    const Matrix6cd U2 = C * twisted_shift(k + xi);
    for (int e = 0; e < kArcCount; ++e) {
      Vector6cd v1 = Vector6cd::Zero();
      Vector6cd v2 = Vector6cd::Zero();
      v1(e) = 1.0;
      v2(e) = 1.0;
      for (std::int64_t s = 0; s < steps; ++s) {
        v1 = U1 * v1;
        v2 = U2 * v2;
      }
      acc += v1.dot(v2) * InitialEnsemble::weight;
    }
  }
  return acc / static_cast<double>(grid);
}

} // namespace magnifier
