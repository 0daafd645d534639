#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "magnifier/errors.hpp"
#include "magnifier/graph.hpp"
#include "magnifier/rw.hpp"
#include "magnifier/szegedy.hpp"

// The +-i eigenspaces of the walk. The +i eigenspace is spanned by one
// finitely supported vector w(p_j) per round-trip path
// R_j -> S_j -> T_j -> S_{j+1} -> R_{j+1} and back; the -i eigenspace by the
// complex conjugates. Adjacent vectors overlap on the two shared e0 arcs
// with Gram entry <w_j, w_{j+1}> = b, so projections go through the
// tridiagonal Gram system rather than assuming orthogonality.

namespace magnifier {

/// Sparse +i eigenvector attached to the round trip at cell j. Eight arcs:
/// four along the path with weights r_m (-i)^{m-1} and their reversals with
/// weights r_m i^m, where r_1 = sqrt(rpq), r_2 = sqrt(q(1-r)),
/// r_3 = sqrt((1-r)(1-q)), r_4 = sqrt((1-q)(1-p)r).
struct RoundTripVector {
  std::int64_t cell;
  std::array<std::pair<SitePosition, std::complex<double>>, 8> entries;
  double norm_squared;

  /// Materialize into a window (requires cells j and j+1 inside).
  StateVector as_state(const Window& w) const {
    StateVector s(w);
    for (const auto& [pos, c] : entries) s.amp(flat_index(pos, w)) = c;
    return s;
  }
};

namespace detail {

inline std::array<double, 4> round_trip_weights(const RWParams& params) {
  const double p = params.p, q = params.q, r = params.r;
  return {std::sqrt(r * p * q), std::sqrt(q * (1.0 - r)),
          std::sqrt((1.0 - r) * (1.0 - q)), std::sqrt((1.0 - q) * (1.0 - p) * r)};
}

inline RoundTripVector make_round_trip(const RWParams& params, std::int64_t j) {
  const auto rw = round_trip_weights(params);
  const std::complex<double> i01(0.0, 1.0);
  RoundTripVector v;
  v.cell = j;
  v.entries = {{{{j, Arc::E0Bar}, rw[0]},
                {{j, Arc::E0}, i01 * rw[0]},
                {{j, Arc::EPlus}, -i01 * rw[1]},
                {{j, Arc::EPlusBar}, -rw[1]},
                {{j, Arc::EMinusBar}, -rw[2]},
                {{j + 1, Arc::EMinus}, -i01 * rw[2]},
                {{j + 1, Arc::E0}, i01 * rw[3]},
                {{j + 1, Arc::E0Bar}, rw[3]}}};
  v.norm_squared = 2.0 * (rw[0] * rw[0] + rw[1] * rw[1] + rw[2] * rw[2] + rw[3] * rw[3]);
  return v;
}

/// Solves the symmetric positive definite tridiagonal system with constant
/// diagonal `diag` and constant off-diagonal `off`.
inline std::vector<std::complex<double>> solve_tridiagonal(
    double diag, double off, std::vector<std::complex<double>> rhs) {
  const size_t n = rhs.size();
  if (n == 0) return rhs;
  std::vector<double> denom(n);
  denom[0] = diag;
  for (size_t i = 1; i < n; ++i) {
    const double m = off / denom[i - 1];
    denom[i] = diag - m * off;
    rhs[i] -= m * rhs[i - 1];
  }
  rhs[n - 1] /= denom[n - 1];
  for (size_t i = n - 1; i-- > 0;) {
    rhs[i] = (rhs[i] - off * rhs[i + 1]) / denom[i];
  }
  return rhs;
}

} // namespace detail

/// Gram data of the round-trip family: <w_j, w_j> and <w_j, w_{j+1}>.
struct RoundTripGram {
  double diagonal;     // 2[(1-r) + r(pq + (1-p)(1-q))]
  double off_diagonal; // b = 2 r sqrt(pq(1-p)(1-q))
};

inline RoundTripGram round_trip_gram(const RWParams& params) {
  const auto rw = detail::round_trip_weights(params);
  return {2.0 * (rw[0] * rw[0] + rw[1] * rw[1] + rw[2] * rw[2] + rw[3] * rw[3]),
          2.0 * rw[0] * rw[3]};
}

/// Builds w(p_j) and verifies the eigen-relation U w = i w to 1e-12 by one
/// application of the real-space step on a private window.
inline RoundTripVector round_trip_vector(const RWParams& params, std::int64_t j,
                                         double tol = 1e-12) {
  RoundTripVector v = detail::make_round_trip(params, j);
  const Window w(j - 2, j + 3);
  const StateVector embedded = v.as_state(w);
  const StateVector stepped = step(params, embedded);
  const std::complex<double> i01(0.0, 1.0);
  const double dev = (stepped.amp - i01 * embedded.amp).norm();
  if (dev > tol * embedded.amp.norm()) {
    throw NumericalConsistencyError("round_trip_vector: eigen-relation violated, dev=" +
                                    std::to_string(dev));
  }
  return v;
}

/// Orthogonal projections of a state onto L+ = span{w(p_j)} and
/// L- = span{conj(w(p_j))}, with the basis restricted to the window. The
/// Gram system makes the projection exact despite the adjacent overlaps.
inline std::pair<StateVector, StateVector> project_localized(const RWParams& params,
                                                             const StateVector& state) {
  const Window& w = state.window;
  const RoundTripGram gram = round_trip_gram(params);
  const std::int64_t jlo = w.jmin, jhi = w.jmax - 1; // w_j occupies cells j, j+1
  const auto nbasis = static_cast<size_t>(jhi - jlo + 1);

  std::vector<std::complex<double>> rhs_plus(nbasis), rhs_minus(nbasis);
  std::vector<RoundTripVector> basis;
  basis.reserve(nbasis);
  for (std::int64_t j = jlo; j <= jhi; ++j) {
    basis.push_back(detail::make_round_trip(params, j));
    std::complex<double> bp = 0.0, bm = 0.0;
    for (const auto& [pos, c] : basis.back().entries) {
      const auto psi = state.amp(flat_index(pos, w));
      bp += std::conj(c) * psi; // <w_j, psi>
      bm += c * psi;            // <conj(w_j), psi>
    }
    rhs_plus[j - jlo] = bp;
    rhs_minus[j - jlo] = bm;
  }
  const auto cp = detail::solve_tridiagonal(gram.diagonal, gram.off_diagonal, std::move(rhs_plus));
  const auto cm = detail::solve_tridiagonal(gram.diagonal, gram.off_diagonal, std::move(rhs_minus));

  StateVector plus(w), minus(w);
  for (size_t i = 0; i < nbasis; ++i) {
    for (const auto& [pos, c] : basis[i].entries) {
      const auto idx = flat_index(pos, w);
      plus.amp(idx) += cp[i] * c;
      minus.amp(idx) += cm[i] * std::conj(c);
    }
  }
  return {std::move(plus), std::move(minus)};
}

enum class Parity { Even, Odd };

/// n -> infinity limit of mu_n(j) along even or odd n: the per-cell mass of
/// (Pi_+ + (-1)^n Pi_-) applied to the initial state.
struct LocalizationProfile {
  Distribution masses;
  Parity parity;
};

inline LocalizationProfile localization_profile(const RWParams& params,
                                                const StateVector& initial, Parity parity) {
  auto [plus, minus] = project_localized(params, initial);
  const double sign = parity == Parity::Even ? 1.0 : -1.0;
  StateVector combined(initial.window);
  combined.amp = plus.amp + sign * minus.amp;
  return {distribution(combined), parity};
}

/// Average of the even and odd profiles: per-cell mass of Pi_+ Psi plus
/// per-cell mass of Pi_- Psi (the (-1)^n cross terms cancel).
inline Distribution parity_averaged_profile(const RWParams& params, const StateVector& initial) {
  auto [plus, minus] = project_localized(params, initial);
  Distribution d(initial.window);
  const auto dp = distribution(plus);
  const auto dm = distribution(minus);
  d.mass = dp.mass + dm.mass;
  return d;
}

/// Analytic localization profiles of the mixed ensemble.
struct EnsembleProfiles {
  Distribution even;
  Distribution odd;
  Distribution averaged;
};

inline EnsembleProfiles mixed_localization_profiles(const RWParams& params, const Window& w) {
  EnsembleProfiles out{Distribution(w), Distribution(w), Distribution(w)};
  for (Arc a : all_arcs()) {
    const StateVector psi0 = basis_state(w, 0, a);
    auto [plus, minus] = project_localized(params, psi0);
    StateVector even(w), odd(w);
    even.amp = plus.amp + minus.amp;
    odd.amp = plus.amp - minus.amp;
    out.even.mass += InitialEnsemble::weight * distribution(even).mass;
    out.odd.mass += InitialEnsemble::weight * distribution(odd).mass;
    out.averaged.mass += InitialEnsemble::weight *
                         (distribution(plus).mass + distribution(minus).mass);
  }
  return out;
}

/// Finite-horizon time average (1/(T_hi-T_lo)) sum_{n=T_lo}^{T_hi-1} mu_n(j)
/// of the mixed ensemble, restricted to |j| <= radius.
inline Distribution time_averaged_distribution(const RWParams& params, std::int64_t t_lo,
                                               std::int64_t t_hi, std::int64_t radius) {
  if (t_lo < 0 || t_hi <= t_lo) {
    throw std::invalid_argument("time_averaged_distribution: need 0 <= T_lo < T_hi");
  }
  const Window run = run_window(t_hi);
  const Window out_win(-radius, radius);
  Distribution acc(out_win);
  for (Arc a : all_arcs()) {
    StateVector psi = basis_state(run, 0, a);
    for (std::int64_t n = 1; n <= t_hi - 1; ++n) {
      psi = step(params, psi);
      if (n >= t_lo) {
        for (std::int64_t j = -radius; j <= radius; ++j) {
          acc.mass(j + radius) +=
              psi.amp.segment(flat_index({j, Arc::E0}, run), kArcCount).squaredNorm();
        }
      }
    }
    // n = t_lo = 0 term (mu_0) when the average starts at zero
    if (t_lo == 0) {
      const StateVector init = basis_state(run, 0, a);
      for (std::int64_t j = -radius; j <= radius; ++j) {
        acc.mass(j + radius) +=
            init.amp.segment(flat_index({j, Arc::E0}, run), kArcCount).squaredNorm();
      }
    }
  }
  acc.mass *= InitialEnsemble::weight / static_cast<double>(t_hi - t_lo);
  return acc;
}

} // namespace magnifier
