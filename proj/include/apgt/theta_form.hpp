#pragma once

#include "apgt/core_model.hpp"
#include "apgt/projections.hpp"
#include "apgt/thresholding.hpp"

#include <span>
#include <vector>

namespace apgt {

/// Subgradient-projection restatement of one APGT iteration. Independent
/// reference path: it aggregates analytic slab distances through the convex
/// surrogate Theta_n and its subgradient instead of the extrapolated
/// projection average, and never touches step()'s internals. Used by tests
/// and the theta-equivalence probe.
template <typename Scalar>
Vec<Scalar> step_theta_form(const Vec<Scalar>& a, std::span<const HyperslabT<Scalar>> window,
                            const AlgoParamsT<Scalar>& params) {
  std::vector<const HyperslabT<Scalar>*> active;
  std::vector<Scalar> dist;
  for (const auto& slab : window) {
    const Scalar d = distance_hyperslab(a, slab);
    if (d > Scalar(0)) {
      active.push_back(&slab);
      dist.push_back(d);
    }
  }
  if (active.empty()) return apply_gt(a, params).z;

  const Scalar w = Scalar(1) / Scalar(active.size());
  Scalar Ln = Scalar(0);
  for (Scalar d : dist) Ln += w * d;

  Scalar theta = Scalar(0);
  Vec<Scalar> theta_grad = Vec<Scalar>::Zero(a.size());
  for (std::size_t i = 0; i < active.size(); ++i) {
    theta += w * dist[i] * dist[i] / Ln;
    theta_grad += (w / Ln) * (a - project_hyperslab(a, *active[i]));
  }

  const Scalar grad_norm2 = theta_grad.squaredNorm();
  if (std::sqrt(grad_norm2) <= Scalar(1e-14)) return apply_gt(a, params).z;

  // lambda_n = mu_n / M_n, which the relaxation policy fixes at mu_scale.
  const Scalar lambda_n = params.mu_scale;
  const Vec<Scalar> moved = a - lambda_n * (theta / grad_norm2) * theta_grad;
  return apply_gt(moved, params).z;
}

}  // namespace apgt
