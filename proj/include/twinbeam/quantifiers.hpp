#pragma once

// Exact (theory-side) non-classicality quantifiers: the local quantifier of
// each mode and negativity of the partially transposed state.

#include <algorithm>
#include <cmath>

#include "twinbeam/state.hpp"

namespace twinbeam {

inline constexpr double kQuantifierTolerance = 1e-10;

/// -B_j^2 + |C_j|^2; positive iff mode j is quadrature squeezed.
template <typename Scalar>
Scalar local_quantifier(const TwoModeGaussianState<Scalar>& s, int mode) {
  detail::require(mode == 1 || mode == 2, "mode must be 1 or 2");
  return -s.b(mode) * s.b(mode) + std::norm(s.c(mode));
}

/// Smallest symplectic eigenvalue of the partially transposed covariance.
template <typename Scalar>
Scalar partial_transpose_min_eigenvalue(const TwoModeGaussianState<Scalar>& s) {
  using W = detail::Wide<Scalar>;
  Matrix4<W> sigma = s.symmetric_covariance_wide();
  // p2 -> -p2
  sigma.row(3) *= W(-1);
  sigma.col(3) *= W(-1);
  return static_cast<Scalar>(symplectic_eigenvalues<W>(sigma)(0));
}

/// (1/(2 nu~) - 1)/2 without clipping: negative for separable states.
template <typename Scalar>
Scalar signed_negativity(const TwoModeGaussianState<Scalar>& s) {
  using W = detail::Wide<Scalar>;
  Matrix4<W> sigma = s.symmetric_covariance_wide();
  sigma.row(3) *= W(-1);
  sigma.col(3) *= W(-1);
  const W nu = symplectic_eigenvalues<W>(sigma)(0);
  return static_cast<Scalar>((W(1) / (2 * nu) - 1) / 2);
}

template <typename Scalar>
Scalar negativity(const TwoModeGaussianState<Scalar>& s) {
  return std::max(Scalar(0), signed_negativity(s));
}

template <typename Scalar>
Scalar log_negativity(const TwoModeGaussianState<Scalar>& s) {
  return std::max(Scalar(0), -std::log(2 * partial_transpose_min_eigenvalue(s)));
}

template <typename Scalar>
struct NonclassicalityReport {
  Scalar i_ncl_1{0};
  Scalar i_ncl_2{0};
  Scalar negativity{0};
  bool entangled{false};
  bool locally_nonclassical_1{false};
  bool locally_nonclassical_2{false};
};

template <typename Scalar>
NonclassicalityReport<Scalar> classify(const TwoModeGaussianState<Scalar>& s) {
  const Scalar tol = Scalar(kQuantifierTolerance);
  NonclassicalityReport<Scalar> r;
  r.i_ncl_1 = local_quantifier(s, 1);
  r.i_ncl_2 = local_quantifier(s, 2);
  r.negativity = negativity(s);
  r.entangled = r.negativity > tol;
  r.locally_nonclassical_1 = r.i_ncl_1 > tol;
  r.locally_nonclassical_2 = r.i_ncl_2 > tol;
  return r;
}

}  // namespace twinbeam
