#pragma once

#include "apgt/core_model.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

namespace apgt {

/// Shrinkage rule driving the generalized thresholding operator. The lambda
/// parameter is either fixed or recomputed from the current vector on every
/// application (adaptive mode).
template <typename Scalar>
struct ShrinkageRuleT {
  enum class Kind { kHard, kSoft, kScad, kBridgeHalf };

  Kind kind = Kind::kHard;
  bool adaptive = true;
  Scalar lambda = Scalar(0);  // fixed-lambda mode only
  Scalar alpha = Scalar(12);  // SCAD transition parameter, > 2
  Index extra = 1;            // P: extra shrunk band for BridgeHalf

  static ShrinkageRuleT hard(Scalar lambda) { return {Kind::kHard, false, lambda, Scalar(12), 1}; }
  static ShrinkageRuleT hard_adaptive() { return {Kind::kHard, true, Scalar(0), Scalar(12), 1}; }
  static ShrinkageRuleT soft(Scalar lambda) { return {Kind::kSoft, false, lambda, Scalar(12), 1}; }
  static ShrinkageRuleT soft_adaptive() { return {Kind::kSoft, true, Scalar(0), Scalar(12), 1}; }
  static ShrinkageRuleT scad(Scalar lambda, Scalar alpha) {
    return {Kind::kScad, false, lambda, alpha, 1};
  }
  static ShrinkageRuleT scad_adaptive(Scalar alpha) {
    return {Kind::kScad, true, Scalar(0), alpha, 1};
  }
  static ShrinkageRuleT bridge_half(Scalar lambda, Index P) {
    return {Kind::kBridgeHalf, false, lambda, Scalar(12), P};
  }
  static ShrinkageRuleT bridge_half_adaptive(Index P) {
    return {Kind::kBridgeHalf, true, Scalar(0), Scalar(12), P};
  }

  void validate(Index L, Index K) const {
    if (kind == Kind::kScad && !(alpha > Scalar(2)))
      throw std::invalid_argument("scad: alpha must be > 2");
    if (!adaptive && lambda < Scalar(0))
      throw std::invalid_argument("shrinkage rule: fixed lambda must be >= 0");
    if (kind == Kind::kBridgeHalf) {
      if (extra < 1 || extra > L - K)
        throw std::invalid_argument("bridge: P must lie in [1, L-K]");
      if (!adaptive && !(lambda > Scalar(0)))
        throw std::invalid_argument("bridge: fixed lambda must be > 0");
    }
  }

  const char* name() const {
    switch (kind) {
      case Kind::kHard: return "hard";
      case Kind::kSoft: return "soft";
      case Kind::kScad: return "scad";
      case Kind::kBridgeHalf: return "bridge";
    }
    return "?";
  }
};

using ShrinkageRule = ShrinkageRuleT<double>;

/// Parameters of one APGT instance.
template <typename Scalar>
struct AlgoParamsT {
  Index K = 1;                     // target sparsity level, in [1, L-1]
  Index q = 1;                     // concurrent-hyperslab window size
  Scalar eps_prime = Scalar(1);    // relaxation floor, in (0, 1]
  Scalar mu_scale = Scalar(1);     // mu_n = mu_scale * M_n, in [eps', 2-eps']
  Scalar delta = Scalar(1e-6);     // strict-shrinkage margin, > 0
  ShrinkageRuleT<Scalar> rule = ShrinkageRuleT<Scalar>::hard_adaptive();

  void validate(Index L) const {
    if (L < 2) throw std::invalid_argument("params: ambient dimension must be >= 2");
    if (K < 1 || K > L - 1) throw std::invalid_argument("params: K must lie in [1, L-1]");
    if (q < 1) throw std::invalid_argument("params: q must be >= 1");
    if (!(eps_prime > Scalar(0)) || eps_prime > Scalar(1))
      throw std::invalid_argument("params: eps_prime must lie in (0, 1]");
    if (mu_scale < eps_prime || mu_scale > Scalar(2) - eps_prime)
      throw std::invalid_argument("params: mu_scale must lie in [eps', 2-eps']");
    if (!(delta > Scalar(0))) throw std::invalid_argument("params: delta must be > 0");
    rule.validate(L, K);
  }
};

using AlgoParams = AlgoParamsT<double>;

/// Per-application context of the GT operator: the kept tuple and the
/// magnitude boundaries that parameterize the shrinkage rule.
template <typename Scalar>
struct GtContextT {
  Scalar xi_K = Scalar(0);     // smallest of the K largest magnitudes
  Scalar xi_KP = Scalar(0);    // same at depth K+P (BridgeHalf only)
  Scalar lambda_n = Scalar(0); // effective lambda of this application
  SupportTuple J;              // the K kept indices
};

using GtContext = GtContextT<double>;

namespace detail {

// Selection shared by top_k_support / xi_value / apply_gt: indices of the K
// largest magnitudes (ties to the smallest index), plus the K-th magnitude.
template <typename Derived>
std::pair<SupportTuple, typename Derived::Scalar> select_top_k(
    const Eigen::MatrixBase<Derived>& x, Index K) {
  using Scalar = typename Derived::Scalar;
  EIGEN_STATIC_ASSERT_VECTOR_ONLY(Derived);
  const auto& xv = x.derived();
  const Index L = xv.size();
  if (K < 1 || K > L) throw std::invalid_argument("top_k_support: K out of range");

  std::vector<Index> order(static_cast<std::size_t>(L));
  std::iota(order.begin(), order.end(), Index(0));
  const auto before = [&](Index i, Index j) {
    using std::abs;
    const Scalar ai = abs(xv(i));
    const Scalar aj = abs(xv(j));
    return ai > aj || (ai == aj && i < j);
  };
  std::nth_element(order.begin(), order.begin() + (K - 1), order.end(), before);

  using std::abs;
  Scalar xi = abs(xv(order[static_cast<std::size_t>(K - 1)]));
  std::vector<Index> kept(order.begin(), order.begin() + K);
  std::sort(kept.begin(), kept.end());
  return {SupportTuple(std::move(kept)), xi};
}

template <typename Scalar>
Scalar positive_part(Scalar v) {
  return v > Scalar(0) ? v : Scalar(0);
}

template <typename Scalar>
Scalar sign_of(Scalar v) {
  return v > Scalar(0) ? Scalar(1) : (v < Scalar(0) ? Scalar(-1) : Scalar(0));
}

// Largest nonnegative root zbar of  zbar + (lambda/2) zbar^{-1/2} = abs_tau,
// via the substitution s = sqrt(zbar):  s^3 - abs_tau*s + lambda/2 = 0.
// Exists iff abs_tau >= c_bt(lambda); solved in trigonometric form with one
// guarded Newton refinement.
template <typename Scalar>
Scalar bridge_zbar(Scalar abs_tau, Scalar lambda) {
  using std::abs;
  using std::acos;
  using std::cos;
  using std::sqrt;
  assert(abs_tau >= Scalar(0) && lambda >= Scalar(0));
  if (lambda == Scalar(0)) return abs_tau;
  if (abs_tau == Scalar(0))
    throw std::runtime_error("bridge: no root for tau = 0 with lambda > 0");

  Scalar arg = -(Scalar(3) * sqrt(Scalar(3)) * lambda) / (Scalar(4) * abs_tau * sqrt(abs_tau));
  arg = std::max(Scalar(-1), std::min(Scalar(1), arg));
  Scalar s = Scalar(2) * sqrt(abs_tau / Scalar(3)) * cos(acos(arg) / Scalar(3));

  const Scalar f = s * s * s - abs_tau * s + lambda / Scalar(2);
  const Scalar fp = Scalar(3) * s * s - abs_tau;
  if (abs(fp) > Scalar(1e-12) * std::max(Scalar(1), abs_tau)) {
    const Scalar s_ref = s - f / fp;
    const Scalar f_ref = s_ref * s_ref * s_ref - abs_tau * s_ref + lambda / Scalar(2);
    if (abs(f_ref) <= abs(f)) s = s_ref;
  }

  const Scalar zbar = s * s;
  const Scalar resid = zbar + lambda / (Scalar(2) * sqrt(zbar)) - abs_tau;
  if (!(abs(resid) <= Scalar(1e-10)))
    throw std::runtime_error("bridge: no real root in (0, |tau|] (inconsistent lambda/tau pair)");
  return zbar;
}

}  // namespace detail

/// Indices of the K largest-magnitude components; ties broken by smallest
/// index. Deterministic.
template <typename Derived>
SupportTuple top_k_support(const Eigen::MatrixBase<Derived>& x, Index K) {
  return detail::select_top_k(x, K).first;
}

/// The smallest among the K largest absolute component values.
template <typename Derived>
typename Derived::Scalar xi_value(const Eigen::MatrixBase<Derived>& x, Index K) {
  return detail::select_top_k(x, K).second;
}

/// Discontinuity boundary of the bridge rule at gamma = 1/2; equals
/// 3 (lambda/4)^{2/3}.
template <typename Scalar>
Scalar c_bt(Scalar lambda) {
  if (!(lambda > Scalar(0))) throw std::invalid_argument("c_bt: lambda must be > 0");
  const Scalar r = std::cbrt(lambda / Scalar(4));
  return Scalar(3) * r * r;
}

/// Modified hard-thresholding scalar rule.
template <typename Scalar>
Scalar shrink_hard(Scalar tau, const GtContextT<Scalar>& ctx, Scalar delta) {
  using std::abs;
  const Scalar a = abs(tau);
  if (a <= std::min(ctx.lambda_n, ctx.xi_K)) return Scalar(0);
  return detail::sign_of(tau) * detail::positive_part(a - delta);
}

/// Soft-thresholding scalar rule with strict-shrinkage margin.
template <typename Scalar>
Scalar shrink_soft(Scalar tau, Scalar lambda, Scalar delta) {
  using std::abs;
  return detail::sign_of(tau) * detail::positive_part(abs(tau) - lambda - delta);
}

/// Modified SCAD scalar rule. The segment (alpha*lambda, xi_K] is not covered
/// by the piecewise definition; there the component is kept up to the delta
/// margin.
template <typename Scalar>
Scalar shrink_scad(Scalar tau, const GtContextT<Scalar>& ctx, Scalar alpha, Scalar delta) {
  using std::abs;
  if (!(alpha > Scalar(2))) throw std::invalid_argument("shrink_scad: alpha must be > 2");
  const Scalar lam = ctx.lambda_n;
  const Scalar a = abs(tau);
  const Scalar sgn = detail::sign_of(tau);
  if (a <= lam) return Scalar(0);
  if (a <= Scalar(2) * lam) return sgn * detail::positive_part(a - lam - delta);
  if (a <= std::min(ctx.xi_K, alpha * lam))
    return sgn *
           detail::positive_part(((alpha - Scalar(1)) * a - alpha * lam) / (alpha - Scalar(2)) -
                                 delta);
  return sgn * detail::positive_part(a - delta);
}

/// Modified bridge (ell_{1/2}) scalar rule, fixed-lambda form.
template <typename Scalar>
Scalar shrink_bridge_half(Scalar tau, const GtContextT<Scalar>& ctx, Scalar delta) {
  using std::abs;
  const Scalar a = abs(tau);
  if (a < std::min(c_bt(ctx.lambda_n), ctx.xi_K)) return Scalar(0);
  const Scalar zbar = detail::bridge_zbar(a, ctx.lambda_n);
  return detail::sign_of(tau) * detail::positive_part(zbar - delta);
}

/// Per-application lambda of the adaptive rules: the magnitude boundary that
/// pins the post-threshold sparsity level.
template <typename Derived, typename Scalar = typename Derived::Scalar>
Scalar adaptive_lambda(const Eigen::MatrixBase<Derived>& x, const ShrinkageRuleT<Scalar>& rule,
                       Index K) {
  if (!rule.adaptive) throw std::invalid_argument("adaptive_lambda: rule is not adaptive");
  const Index L = x.derived().size();
  if (K < 1 || K > L - 1) throw std::invalid_argument("adaptive_lambda: K out of range");
  using RK = typename ShrinkageRuleT<Scalar>::Kind;
  switch (rule.kind) {
    case RK::kHard:
    case RK::kSoft:
      return xi_value(x, K);
    case RK::kScad:
      return xi_value(x, K) / rule.alpha;
    case RK::kBridgeHalf: {
      if (K + rule.extra > L)
        throw std::invalid_argument("adaptive_lambda: K + P exceeds dimension");
      const Scalar xi_kp = xi_value(x, K + rule.extra);
      const Scalar t = xi_kp / Scalar(3);
      return Scalar(4) * t * std::sqrt(t);
    }
  }
  throw std::logic_error("adaptive_lambda: unreachable");
}

template <typename Scalar>
struct GtResultT {
  Vec<Scalar> z;
  GtContextT<Scalar> ctx;
};

using GtResult = GtResultT<double>;

/// Generalized thresholding: the K largest-magnitude components pass through
/// unchanged, every other component goes through the shrinkage rule. Adaptive
/// BridgeHalf uses the two-boundary form (kill at xi^{K+P}, cubic shrink in
/// between), which keeps every output (K+P)-sparse.
template <typename Derived, typename Scalar = typename Derived::Scalar>
GtResultT<Scalar> apply_gt(const Eigen::MatrixBase<Derived>& x,
                           const AlgoParamsT<Scalar>& params) {
  using std::abs;
  const auto& xv = x.derived();
  const Index L = xv.size();
  params.validate(L);

  GtContextT<Scalar> ctx;
  auto [tuple, xi] = detail::select_top_k(xv, params.K);
  ctx.J = std::move(tuple);
  ctx.xi_K = xi;

  const auto& rule = params.rule;
  using RK = typename ShrinkageRuleT<Scalar>::Kind;
  const bool adaptive_bridge = rule.kind == RK::kBridgeHalf && rule.adaptive;
  if (rule.kind == RK::kBridgeHalf) ctx.xi_KP = xi_value(xv, params.K + rule.extra);
  ctx.lambda_n = rule.adaptive ? adaptive_lambda(xv, rule, params.K) : rule.lambda;

  Vec<Scalar> z(L);
  const auto& kept = ctx.J.indices();
  std::size_t k = 0;
  for (Index l = 0; l < L; ++l) {
    if (k < kept.size() && kept[k] == l) {
      z(l) = xv(l);
      ++k;
      continue;
    }
    const Scalar tau = xv(l);
    switch (rule.kind) {
      case RK::kHard:
        z(l) = shrink_hard(tau, ctx, params.delta);
        break;
      case RK::kSoft:
        z(l) = shrink_soft(tau, ctx.lambda_n, params.delta);
        break;
      case RK::kScad:
        z(l) = shrink_scad(tau, ctx, rule.alpha, params.delta);
        break;
      case RK::kBridgeHalf:
        if (adaptive_bridge) {
          const Scalar a = abs(tau);
          z(l) = a <= ctx.xi_KP
                     ? Scalar(0)
                     : detail::sign_of(tau) *
                           detail::positive_part(detail::bridge_zbar(a, ctx.lambda_n) -
                                                 params.delta);
        } else {
          z(l) = shrink_bridge_half(tau, ctx, params.delta);
        }
        break;
    }
  }
  return {std::move(z), std::move(ctx)};
}

}  // namespace apgt
