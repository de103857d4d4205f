#pragma once

#include "apgt/core_model.hpp"

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace apgt {

enum class OmegaStatus { kFeasible, kInfeasible, kNoConverge };

template <typename Scalar>
struct OmegaResultT {
  OmegaStatus status = OmegaStatus::kNoConverge;
  Scalar distance = std::numeric_limits<Scalar>::quiet_NaN();
  long iterations = 0;

  bool feasible() const { return status == OmegaStatus::kFeasible; }
};

using OmegaResult = OmegaResultT<double>;

namespace detail {

// Restriction of the slab system to the coordinates in J. Rows whose
// restricted sensing vector vanishes either drop out (constraint trivially
// satisfied on M_J) or certify infeasibility outright.
template <typename Scalar>
struct RestrictedSlabs {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> A;  // m x k rows u_i|_J
  Vec<Scalar> c;                                            // outputs y_i
  Vec<Scalar> eps;
  Vec<Scalar> row_norm2;
  bool trivially_infeasible = false;
};

template <typename Scalar>
RestrictedSlabs<Scalar> restrict_slabs(const SupportTuple& J,
                                       std::span<const HyperslabT<Scalar>> slabs) {
  using std::abs;
  RestrictedSlabs<Scalar> out;
  const Index k = J.size();
  std::vector<Index> keep;
  std::vector<Vec<Scalar>> rows;
  for (std::size_t i = 0; i < slabs.size(); ++i) {
    Vec<Scalar> row(k);
    for (Index j = 0; j < k; ++j) row(j) = slabs[i].u()(J[static_cast<std::size_t>(j)]);
    const Scalar n2 = row.squaredNorm();
    if (n2 == Scalar(0)) {
      if (abs(slabs[i].y()) > slabs[i].epsilon()) out.trivially_infeasible = true;
      continue;
    }
    keep.push_back(static_cast<Index>(i));
    rows.push_back(std::move(row));
  }
  const Index m = static_cast<Index>(keep.size());
  out.A.resize(m, k);
  out.c.resize(m);
  out.eps.resize(m);
  out.row_norm2.resize(m);
  for (Index i = 0; i < m; ++i) {
    out.A.row(i) = rows[static_cast<std::size_t>(i)].transpose();
    out.c(i) = slabs[static_cast<std::size_t>(keep[static_cast<std::size_t>(i)])].y();
    out.eps(i) = slabs[static_cast<std::size_t>(keep[static_cast<std::size_t>(i)])].epsilon();
    out.row_norm2(i) = out.A.row(i).squaredNorm();
  }
  return out;
}

// Max restricted-space distance to any slab at z.
template <typename Scalar>
Scalar max_violation(const RestrictedSlabs<Scalar>& rs, const Vec<Scalar>& z) {
  using std::abs;
  using std::sqrt;
  Scalar worst = Scalar(0);
  for (Index i = 0; i < rs.A.rows(); ++i) {
    const Scalar excess = abs(rs.A.row(i).dot(z) - rs.c(i)) - rs.eps(i);
    if (excess > Scalar(0)) worst = std::max(worst, excess / sqrt(rs.row_norm2(i)));
  }
  return worst;
}

// Cyclic projections onto the restricted slabs. A point meeting every
// constraint within tol is a constructive feasibility witness; stalling at a
// positive violation indicates an empty intersection (limit cycle).
template <typename Scalar>
OmegaStatus certify_feasibility(const RestrictedSlabs<Scalar>& rs, Vec<Scalar> z,
                                long max_sweeps, Scalar tol) {
  using std::abs;
  Scalar prev_disp = std::numeric_limits<Scalar>::infinity();
  int stall = 0;
  for (long sweep = 0; sweep < max_sweeps; ++sweep) {
    Vec<Scalar> z_old = z;
    for (Index i = 0; i < rs.A.rows(); ++i) {
      const Scalar r = rs.A.row(i).dot(z) - rs.c(i);
      if (abs(r) > rs.eps(i)) {
        const Scalar shift = (r > rs.eps(i) ? rs.eps(i) - r : -rs.eps(i) - r) / rs.row_norm2(i);
        z += shift * rs.A.row(i).transpose();
      }
    }
    if (max_violation(rs, z) <= tol) return OmegaStatus::kFeasible;
    const Scalar disp = (z - z_old).norm();
    if (abs(disp - prev_disp) <= Scalar(1e-14) * std::max(Scalar(1), disp)) {
      if (++stall >= 200) return OmegaStatus::kInfeasible;
    } else {
      stall = 0;
    }
    prev_disp = disp;
  }
  return OmegaStatus::kNoConverge;
}

// Least-distance point in the restricted slab intersection, via FISTA on the
// dual:  min_nu  0.5 nu^T G nu - nu^T r + sum_i eps_i |nu_i|,  y* = c0 - A^T nu.
// Returns the squared restricted distance.
template <typename Scalar>
bool dual_least_distance(const RestrictedSlabs<Scalar>& rs, const Vec<Scalar>& anchor,
                         Scalar* dist2, long* iters_out) {
  const Index m = rs.A.rows();
  if (m == 0) {
    *dist2 = Scalar(0);
    return true;
  }
  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> G = rs.A * rs.A.transpose();
  const Vec<Scalar> r = rs.A * anchor - rs.c;
  const Scalar lip = std::max(G.norm(), Scalar(1e-30));
  const Scalar t = Scalar(1) / lip;
  const Scalar tol = Scalar(1e-10) * std::max(Scalar(1), r.template lpNorm<Eigen::Infinity>());

  auto prox = [&](const Vec<Scalar>& v) {
    Vec<Scalar> out(m);
    for (Index i = 0; i < m; ++i) {
      const Scalar thr = t * rs.eps(i);
      out(i) = v(i) > thr ? v(i) - thr : (v(i) < -thr ? v(i) + thr : Scalar(0));
    }
    return out;
  };

  Vec<Scalar> nu = Vec<Scalar>::Zero(m);
  Vec<Scalar> y = nu;
  Scalar momentum = Scalar(1);
  const long cap = 300000;
  for (long k = 0; k < cap; ++k) {
    const Vec<Scalar> grad = G * y - r;
    const Vec<Scalar> nu_next = prox(y - t * grad);
    const Scalar stat = (nu_next - prox(nu_next - t * (G * nu_next - r))).template lpNorm<Eigen::Infinity>() / t;
    const Scalar momentum_next = (Scalar(1) + std::sqrt(Scalar(1) + Scalar(4) * momentum * momentum)) / Scalar(2);
    Vec<Scalar> y_next = nu_next + ((momentum - Scalar(1)) / momentum_next) * (nu_next - nu);
    // adaptive restart when momentum fights the descent direction
    if ((y - nu_next).dot(nu_next - nu) > Scalar(0)) {
      y_next = nu_next;
      momentum = Scalar(1);
    } else {
      momentum = momentum_next;
    }
    nu = nu_next;
    y = std::move(y_next);
    if (stat <= tol) {
      *dist2 = (rs.A.transpose() * nu).squaredNorm();
      *iters_out += k + 1;
      return true;
    }
  }
  *iters_out += cap;
  return false;
}

}  // namespace detail

/// Distance of `a` to  M_J intersected with the given hyperslabs, computed by
/// an independent convex oracle on the J-restricted coordinates (feasibility
/// by cyclic projections, least distance by a dual proximal-gradient solve).
/// Desk-scale diagnostic; not part of the online update path.
template <typename Scalar>
OmegaResultT<Scalar> omega_distance(const Vec<Scalar>& a, const SupportTuple& J,
                                    std::span<const HyperslabT<Scalar>> slabs) {
  using std::abs;
  if (J.max_index() >= a.size())
    throw std::invalid_argument("omega_distance: tuple index out of range");

  OmegaResultT<Scalar> res;
  Scalar off2 = Scalar(0);
  {
    const auto& idx = J.indices();
    std::size_t k = 0;
    for (Index l = 0; l < a.size(); ++l) {
      if (k < idx.size() && idx[k] == l) {
        ++k;
        continue;
      }
      off2 += a(l) * a(l);
    }
  }

  auto rs = detail::restrict_slabs(J, slabs);
  if (rs.trivially_infeasible) {
    res.status = OmegaStatus::kInfeasible;
    res.distance = std::numeric_limits<Scalar>::infinity();
    return res;
  }

  Vec<Scalar> anchor(J.size());
  for (Index j = 0; j < J.size(); ++j) anchor(j) = a(J[static_cast<std::size_t>(j)]);

  if (J.size() == 0 || rs.A.rows() == 0) {
    // Pure subspace distance once no restricted constraint remains.
    res.status = OmegaStatus::kFeasible;
    res.distance = std::sqrt(off2);
    return res;
  }

  if (detail::max_violation(rs, anchor) == Scalar(0)) {
    res.status = OmegaStatus::kFeasible;
    res.distance = std::sqrt(off2);
    return res;
  }

  const OmegaStatus feas =
      detail::certify_feasibility(rs, anchor, 50000, Scalar(1e-12) * std::max(Scalar(1), anchor.norm()));
  if (feas != OmegaStatus::kFeasible) {
    res.status = feas;
    res.distance = feas == OmegaStatus::kInfeasible ? std::numeric_limits<Scalar>::infinity()
                                                    : std::numeric_limits<Scalar>::quiet_NaN();
    return res;
  }

  Scalar dist2 = Scalar(0);
  if (!detail::dual_least_distance(rs, anchor, &dist2, &res.iterations)) {
    res.status = OmegaStatus::kNoConverge;
    return res;
  }
  res.status = OmegaStatus::kFeasible;
  res.distance = std::sqrt(off2 + dist2);
  return res;
}

}  // namespace apgt
