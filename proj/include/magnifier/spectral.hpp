#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "magnifier/errors.hpp"
#include "magnifier/graph.hpp"
#include "magnifier/rw.hpp"

// Fourier-fiber operators of the walk. The twisted shift S_k reverses arcs
// with the phase e^{-i theta(e)} from the 1-form theta(e-) = -k,
// theta(eb-) = +k (zero elsewhere); the coin C reflects about the
// square-root-of-transition-probability vector at each origin vertex. The
// fiber of the real-space evolution is U_k = C S_k, with
// spec(U_k) = {+-i, +-e^{+-i nu(k)}}, nu(k) = arccos sqrt(a + b cos k).

namespace magnifier {

using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Matrix6cd = Eigen::Matrix<std::complex<double>, 6, 6>;
using Vector6cd = Eigen::Matrix<std::complex<double>, 6, 1>;

/// 1-form value theta(a) at twist k.
inline double one_form(Arc a, double k) {
  if (a == Arc::EMinus) return -k;
  if (a == Arc::EMinusBar) return k;
  return 0.0;
}

/// Coin operator: block diagonal over arcs grouped by origin vertex, each
/// block the reflection 2 v v^T - I with v the unit vector of
/// sqrt-transition-probabilities.
inline Matrix6d coin_operator(const RWParams& params) {
  Matrix6d C = Matrix6d::Zero();
  auto fill_block = [&](std::initializer_list<Arc> arcs) {
    std::vector<int> idx;
    for (Arc a : arcs) idx.push_back(arc_index(a));
    std::vector<double> v;
    for (Arc a : arcs) v.push_back(std::sqrt(transition_prob(params, a)));
    for (size_t i = 0; i < idx.size(); ++i)
      for (size_t j = 0; j < idx.size(); ++j)
        C(idx[i], idx[j]) = 2.0 * v[i] * v[j] - (i == j ? 1.0 : 0.0);
  };
  fill_block({Arc::E0, Arc::EPlus, Arc::EMinus}); // origin S
  fill_block({Arc::EPlusBar, Arc::EMinusBar});    // origin T
  fill_block({Arc::E0Bar});                       // origin R
  return C;
}

/// Twisted shift S_k: (S_k psi)(a) = e^{-i theta(a)} psi(reverse(a)).
/// Unitary, and an involution since theta(reverse(a)) = -theta(a).
inline Matrix6cd twisted_shift(double k) {
  Matrix6cd S = Matrix6cd::Zero();
  for (Arc a : all_arcs()) {
    S(arc_index(a), arc_index(reverse(a))) = std::polar(1.0, -one_form(a, k));
  }
  return S;
}

/// Fiber of the walk at momentum k.
struct TwistedUnitary {
  double k;
  Matrix6cd matrix;
};

/// U_k = C S_k, the Fourier fiber of the real-space evolution: the shift
/// acts first, then the coin scatters at the arrival vertex.
inline TwistedUnitary twisted_szegedy_unitary(const RWParams& params, double k) {
  return {k, coin_operator(params) * twisted_shift(k)};
}

/// Boundary operator d_A (rows = vertices R,S,T) and its adjoint; rows of
/// d_A are unit vectors, so d_A d_A^* = I on the vertex space.
struct BoundaryOps {
  Eigen::Matrix<double, 3, 6> d_a;
  Eigen::Matrix<double, 6, 3> d_a_adjoint;
};

inline BoundaryOps boundary_ops(const RWParams& params) {
  Eigen::Matrix<double, 3, 6> D = Eigen::Matrix<double, 3, 6>::Zero();
  for (Arc a : all_arcs()) {
    D(static_cast<int>(origin(a)), arc_index(a)) = std::sqrt(transition_prob(params, a));
  }
  return {D, D.transpose()};
}

/// Eigenvector of J_k with eigenvalue 0, in closed form.
inline Eigen::Vector3cd zero_mode(const RWParams& params, double k) {
  const double p = params.p, q = params.q, r = params.r;
  Eigen::Vector3cd f;
  f(0) = std::sqrt((1.0 - p) * (1.0 - q) * r) * std::polar(1.0, k) + std::sqrt(r * p * q);
  f(1) = 0.0;
  f(2) = -std::sqrt(1.0 - r);
  return f;
}

/// Lift an eigenvector f of J_k (J_k f = cos(nu) f, cos nu != +-1) to the
/// eigenvector psi = (I - e^{-i nu} S_k) d_A^* f of U_k with eigenvalue
/// e^{i nu}. The eigen-relation is re-verified before returning.
inline Vector6cd lift_eigenvector(const RWParams& params, double k, const Eigen::Vector3cd& f,
                                  double nu, double tol = 1e-10) {
  const Eigen::Matrix3cd J = twisted_matrix(params, k);
  const double fn = f.norm();
  if (fn == 0.0) throw std::invalid_argument("lift_eigenvector: zero input vector");
  if ((J * f - std::cos(nu) * f).norm() > tol * fn) {
    throw std::invalid_argument("lift_eigenvector: f is not a cos(nu)-eigenvector of J_k");
  }
  const Matrix6cd S = twisted_shift(k);
  const BoundaryOps ops = boundary_ops(params);
  const Vector6cd lifted = ops.d_a_adjoint.cast<std::complex<double>>() * f;
  const Vector6cd psi = lifted - std::polar(1.0, -nu) * (S * lifted);
  const Matrix6cd U = twisted_szegedy_unitary(params, k).matrix;
  if ((U * psi - std::polar(1.0, nu) * psi).norm() > tol * psi.norm()) {
    throw NumericalConsistencyError("lift_eigenvector: lifted vector fails the eigen-relation");
  }
  return psi;
}

/// Expected fiber spectrum {+-i, +-e^{+-i nu(k)}}.
inline std::array<std::complex<double>, 6> expected_fiber_spectrum(const RWParams& params,
                                                                   double k) {
  const SpectralParams s = spectral_params(params);
  const double nu = std::acos(std::min(std::sqrt(s.a + s.b * std::cos(k)), 1.0));
  const std::complex<double> i01(0.0, 1.0);
  const auto e = std::polar(1.0, nu);
  return {i01, -i01, e, -e, std::conj(e), -std::conj(e)};
}

/// Greedy multiset distance between two 6-element complex spectra.
inline double spectrum_set_distance(std::array<std::complex<double>, 6> got,
                                    std::array<std::complex<double>, 6> expected) {
  double maxdev = 0.0;
  std::array<bool, 6> used{};
  for (const auto& e : expected) {
    int best = -1;
    double bestd = 1e300;
    for (int i = 0; i < 6; ++i) {
      if (used[i]) continue;
      const double d = std::abs(got[i] - e);
      if (d < bestd) { bestd = d; best = i; }
    }
    used[best] = true;
    maxdev = std::max(maxdev, bestd);
  }
  return maxdev;
}

struct SpectralMapReport {
  bool pass;
  double max_dev;
};

/// Checks the spectral mapping on a uniform k-grid: the numerically computed
/// eigenvalues of U_k must match {+-i, +-e^{+-i nu(k)}}, and their map under
/// phi_QW(z) = (z + 1/z)/2 = Re z must reproduce {0, +-sqrt(a + b cos k)}
/// with multiplicity two each.
inline SpectralMapReport spectral_map_check(const RWParams& params, int kgrid = 100,
                                            double tol = 1e-10) {
  if (kgrid < 1) throw std::invalid_argument("spectral_map_check: empty k-grid");
  double maxdev = 0.0;
  for (int m = 0; m < kgrid; ++m) {
    const double k = 2.0 * M_PI * m / kgrid;
    const Matrix6cd U = twisted_szegedy_unitary(params, k).matrix;
    Eigen::ComplexEigenSolver<Matrix6cd> solver(U, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
      throw NumericalConsistencyError("spectral_map_check: eigensolver failed");
    }
    std::array<std::complex<double>, 6> got;
    for (int i = 0; i < 6; ++i) got[i] = solver.eigenvalues()(i);
    maxdev = std::max(maxdev, spectrum_set_distance(got, expected_fiber_spectrum(params, k)));

    // phi_QW pushes unit-circle eigenvalues onto their real parts
    std::array<double, 6> pushed;
    for (int i = 0; i < 6; ++i) pushed[i] = got[i].real();
    std::sort(pushed.begin(), pushed.end());
    const auto jspec = twisted_matrix_spectrum(params, k);
    const std::array<double, 6> expectedj = {jspec[0], jspec[0], jspec[1],
                                             jspec[1], jspec[2], jspec[2]};
    for (int i = 0; i < 6; ++i) maxdev = std::max(maxdev, std::abs(pushed[i] - expectedj[i]));
  }
  return {maxdev <= tol, maxdev};
}

/// Dispersion band nu(k) = arccos sqrt(a + b cos k) with closed-form
/// derivatives. Derivative formulas have sin 2nu in denominators, so
/// evaluation within 1e-8 of a band edge is refused.
class BandFunction {
public:
  explicit BandFunction(const RWParams& params)
      : sp_(spectral_params(params)), alpha_(sp_.a + sp_.b), beta_(sp_.a - sp_.b) {}

  double nu(double k) const {
    return std::acos(std::min(std::sqrt(sp_.a + sp_.b * std::cos(k)), 1.0));
  }

  /// nu'(k) = b sin k / sin 2nu(k)
  double dnu(double k) const {
    const double s2 = guarded_sin2nu(k, "nu'");
    return sp_.b * std::sin(k) / s2;
  }

  /// nu''(k) = (1-(alpha+beta))/(2 sin 2nu) + (1-4x^2) cos 2nu/(2 sin 2nu)
  double d2nu(double k) const {
    const double s2 = guarded_sin2nu(k, "nu''");
    const double x = sp_.b * std::sin(k) / s2;
    const double c2 = std::cos(2.0 * nu(k));
    return (1.0 - (alpha_ + beta_)) / (2.0 * s2) + 0.5 * (1.0 - 4.0 * x * x) * c2 / s2;
  }

  const SpectralParams& spectral() const { return sp_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

  static constexpr double kBandEdgeGuard = 1e-8;

private:
  double guarded_sin2nu(double k, const char* what) const {
    const double s2 = std::sin(2.0 * nu(k));
    if (std::abs(s2) <= kBandEdgeGuard) {
      throw std::domain_error(std::string(what) +
                              ": band edge (sin 2nu(k) ~ 0) at k=" + std::to_string(k));
    }
    return s2;
  }

  SpectralParams sp_;
  double alpha_;
  double beta_;
};

} // namespace magnifier
