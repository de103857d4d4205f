#pragma once

#include "apgt/core_model.hpp"
#include "apgt/omega.hpp"
#include "apgt/projections.hpp"
#include "apgt/theta_form.hpp"
#include "apgt/thresholding.hpp"

#include <deque>
#include <span>
#include <utility>
#include <vector>

namespace apgt {

/// Online state: current estimate plus the sliding window of the q most
/// recent hyperslabs (oldest first). Value type; step() is purely functional
/// so runs can be replayed and probed deterministically.
template <typename Scalar>
struct ApgtStateT {
  Vec<Scalar> a;
  std::deque<HyperslabT<Scalar>> window;
  Index n = 0;  // samples processed so far
  AlgoParamsT<Scalar> params;

  static ApgtStateT initial(Vec<Scalar> a0, AlgoParamsT<Scalar> p) {
    p.validate(a0.size());
    return ApgtStateT{std::move(a0), {}, 0, std::move(p)};
  }

  /// Absolute time index of the oldest slab in the window.
  Index window_start() const { return n - static_cast<Index>(window.size()); }
};

using ApgtState = ApgtStateT<double>;

/// Everything one iteration computed, for probing and tests.
template <typename Scalar>
struct StepReportT {
  std::vector<Index> active;    // absolute indices of violated window slabs
  std::vector<Scalar> weights;  // uniform 1/|active|, aligned with `active`
  Scalar Mn = Scalar(1);        // extrapolation bound
  Scalar mu = Scalar(0);        // relaxation actually used
  Vec<Scalar> aggregate;        // sum of weighted projections (a_n if none active)
  Vec<Scalar> a_next;
  GtContextT<Scalar> ctx;
};

using StepReport = StepReportT<double>;

/// Which per-iteration quantities a run records. `mse` needs the ground
/// truth and is filled in by the harness; `omega_distance` is restricted to
/// desk scale (L <= 64, q <= 8).
struct ProbeConfig {
  bool mse = false;
  bool slab_distance = false;
  bool omega_distance = false;
  bool sparsity = false;
  bool theta_equivalence = false;

  bool any() const {
    return mse || slab_distance || omega_distance || sparsity || theta_equivalence;
  }
};

/// Absolute indices of the window slabs the current estimate violates.
template <typename Scalar>
std::vector<Index> active_set(const ApgtStateT<Scalar>& state) {
  std::vector<Index> out;
  Index i = state.window_start();
  for (const auto& slab : state.window) {
    if (is_active(state.a, slab)) out.push_back(i);
    ++i;
  }
  return out;
}

/// Extrapolation bound M_n: ratio of the weighted mean squared projection
/// displacement to the squared displacement of the weighted mean. Equals 1
/// when the aggregate coincides with a (detected at norm tolerance 1e-14).
template <typename Scalar>
Scalar extrapolation_Mn(const Vec<Scalar>& a, const std::vector<Vec<Scalar>>& projections,
                        const std::vector<Scalar>& weights) {
  if (projections.empty() || projections.size() != weights.size())
    throw std::invalid_argument("extrapolation_Mn: need equally many projections and weights");
  Scalar wsum = Scalar(0);
  for (Scalar w : weights) {
    if (w < Scalar(0)) throw std::invalid_argument("extrapolation_Mn: negative weight");
    wsum += w;
  }
  using std::abs;
  if (abs(wsum - Scalar(1)) > Scalar(1e-12))
    throw std::invalid_argument("extrapolation_Mn: weights must sum to 1");

  Scalar num = Scalar(0);
  Vec<Scalar> mean = Vec<Scalar>::Zero(a.size());
  for (std::size_t i = 0; i < projections.size(); ++i) {
    num += weights[i] * (projections[i] - a).squaredNorm();
    mean += weights[i] * projections[i];
  }
  const Scalar denom = (mean - a).squaredNorm();
  if (std::sqrt(denom) <= Scalar(1e-14)) return Scalar(1);
  return num / denom;
}

/// One APGT iteration: push the new hyperslab, project onto the active window
/// slabs, relax by mu_n = mu_scale * M_n, then threshold. O(qL) arithmetic.
template <typename Scalar>
std::pair<ApgtStateT<Scalar>, StepReportT<Scalar>> step(ApgtStateT<Scalar> state,
                                                        const SampleT<Scalar>& new_sample,
                                                        Scalar epsilon_n) {
  const Index L = state.a.size();
  if (new_sample.u.size() != L) throw std::invalid_argument("step: sample dimension mismatch");
  if (epsilon_n < Scalar(0)) throw std::invalid_argument("step: epsilon must be >= 0");

  state.window.emplace_back(new_sample.u, new_sample.y, epsilon_n);
  if (static_cast<Index>(state.window.size()) > state.params.q) state.window.pop_front();
  state.n += 1;

  StepReportT<Scalar> rep;
  rep.active = active_set(state);

  Vec<Scalar> pre_threshold;
  if (rep.active.empty()) {
    rep.Mn = Scalar(1);
    rep.mu = state.params.mu_scale;
    rep.aggregate = state.a;
    pre_threshold = state.a;
  } else {
    const Scalar w = Scalar(1) / Scalar(rep.active.size());
    rep.weights.assign(rep.active.size(), w);

    const Index start = state.window_start();
    Scalar num = Scalar(0);
    Vec<Scalar> aggregate = Vec<Scalar>::Zero(L);
    for (Index idx : rep.active) {
      const auto& slab = state.window[static_cast<std::size_t>(idx - start)];
      Vec<Scalar> proj = project_hyperslab(state.a, slab);
      num += w * (proj - state.a).squaredNorm();
      aggregate += w * proj;
    }
    rep.aggregate = aggregate;

    const Vec<Scalar> dir = aggregate - state.a;
    const Scalar dn2 = dir.squaredNorm();
    rep.Mn = std::sqrt(dn2) <= Scalar(1e-14) ? Scalar(1) : num / dn2;
    rep.mu = state.params.mu_scale * rep.Mn;
    pre_threshold = state.a + rep.mu * dir;
  }

  auto gt = apply_gt(pre_threshold, state.params);
  rep.a_next = gt.z;
  rep.ctx = std::move(gt.ctx);
  state.a = std::move(gt.z);
  return {std::move(state), std::move(rep)};
}

/// Distance of the state's estimate to Omega_n, the intersection of the
/// estimate's own top-K subspace with the active window slabs. Desk scale.
template <typename Scalar>
OmegaResultT<Scalar> probe_omega_distance(const ApgtStateT<Scalar>& state) {
  if (state.a.size() > 64 || state.params.q > 8)
    throw std::invalid_argument("probe_omega_distance: desk-scale only (L <= 64, q <= 8)");
  const SupportTuple J = top_k_support(state.a, state.params.K);
  std::vector<HyperslabT<Scalar>> slabs;
  const Index start = state.window_start();
  for (Index idx : active_set(state))
    slabs.push_back(state.window[static_cast<std::size_t>(idx - start)]);
  return omega_distance<Scalar>(state.a, J, slabs);
}

template <typename Scalar>
struct RunProbesT {
  std::vector<Scalar> mse;  // filled by the harness
  std::vector<Scalar> slab_distance;
  std::vector<Scalar> omega_distance;
  std::vector<Scalar> sparsity;
  std::vector<Scalar> theta_equivalence;
};

using RunProbes = RunProbesT<double>;

template <typename Scalar>
struct RunResultT {
  std::vector<StepReportT<Scalar>> reports;
  RunProbesT<Scalar> probes;
  ApgtStateT<Scalar> final_state;
};

using RunResult = RunResultT<double>;

/// Fold step() over a stream, optionally recording per-iteration probes.
template <typename Scalar>
RunResultT<Scalar> run(Vec<Scalar> initial, std::span<const SampleT<Scalar>> stream,
                       std::span<const Scalar> epsilons, const AlgoParamsT<Scalar>& params,
                       const ProbeConfig& probes = {}) {
  if (stream.size() != epsilons.size())
    throw std::invalid_argument("run: stream and epsilon sequences must align");
  if (probes.omega_distance && (initial.size() > 64 || params.q > 8))
    throw std::invalid_argument("run: omega-distance probe is desk-scale only (L <= 64, q <= 8)");

  RunResultT<Scalar> out;
  out.reports.reserve(stream.size());
  auto state = ApgtStateT<Scalar>::initial(std::move(initial), params);

  for (std::size_t k = 0; k < stream.size(); ++k) {
    Vec<Scalar> prev;
    if (probes.slab_distance || probes.theta_equivalence || probes.omega_distance)
      prev = state.a;

    if (probes.slab_distance) {
      HyperslabT<Scalar> incoming(stream[k].u, stream[k].y, epsilons[k]);
      out.probes.slab_distance.push_back(distance_hyperslab(prev, incoming));
    }

    auto [next, rep] = step(std::move(state), stream[k], epsilons[k]);
    state = std::move(next);

    if (probes.theta_equivalence) {
      std::vector<HyperslabT<Scalar>> win(state.window.begin(), state.window.end());
      const Vec<Scalar> oracle = step_theta_form<Scalar>(prev, win, params);
      out.probes.theta_equivalence.push_back((rep.a_next - oracle).norm());
    }
    if (probes.omega_distance) {
      ApgtStateT<Scalar> pre_view{prev, state.window, state.n, params};
      out.probes.omega_distance.push_back(probe_omega_distance(pre_view).distance);
    }
    if (probes.sparsity) out.probes.sparsity.push_back(Scalar(support(rep.a_next).size()));

    out.reports.push_back(std::move(rep));
  }
  out.final_state = std::move(state);
  return out;
}

}  // namespace apgt
