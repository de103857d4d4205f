#pragma once

#include "apgt/core_model.hpp"

#include <cmath>

namespace apgt {

/// Metric projection onto a hyperslab: identity inside the band, otherwise a
/// single correction along u toward the violated face.
template <typename Derived, typename Scalar = typename Derived::Scalar>
Vec<Scalar> project_hyperslab(const Eigen::MatrixBase<Derived>& a, const HyperslabT<Scalar>& S) {
  using std::abs;
  const Scalar r = S.u().dot(a.derived()) - S.y();
  if (abs(r) <= S.epsilon()) return a.derived();
  const Scalar shift = (r > S.epsilon() ? S.epsilon() - r : -S.epsilon() - r) / S.u_norm2();
  return a.derived() + shift * S.u();
}

/// Distance to the hyperslab: max{0, |u^T a - y| - eps} / ||u||.
template <typename Derived, typename Scalar = typename Derived::Scalar>
Scalar distance_hyperslab(const Eigen::MatrixBase<Derived>& a, const HyperslabT<Scalar>& S) {
  using std::abs;
  using std::sqrt;
  const Scalar excess = abs(S.u().dot(a.derived()) - S.y()) - S.epsilon();
  return excess > Scalar(0) ? excess / sqrt(S.u_norm2()) : Scalar(0);
}

/// True iff the projection moves a, i.e. |u^T a - y| > eps strictly
/// (boundary points are inactive: the slab is closed).
template <typename Derived, typename Scalar = typename Derived::Scalar>
bool is_active(const Eigen::MatrixBase<Derived>& a, const HyperslabT<Scalar>& S) {
  using std::abs;
  return abs(S.u().dot(a.derived()) - S.y()) > S.epsilon();
}

}  // namespace apgt
