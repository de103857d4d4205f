#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace apgt {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

/// One training pair (u_n, y_n) of the linear observation model.
template <typename Scalar>
struct SampleT {
  Vec<Scalar> u;   // sensing vector, length L
  Scalar y{};      // noisy scalar output
  Index n{0};      // time index
};

using Sample = SampleT<double>;

/// The constraint set S[eps] = { a : |u^T a - y| <= eps }.
/// The squared input norm is cached at construction; it is needed by every
/// projection and distance evaluation on this slab.
template <typename Scalar>
class HyperslabT {
 public:
  HyperslabT() = default;

  HyperslabT(Vec<Scalar> u, Scalar y, Scalar epsilon)
      : u_(std::move(u)), y_(y), epsilon_(epsilon), u_norm2_(u_.squaredNorm()) {
    if (epsilon_ < Scalar(0)) throw std::invalid_argument("hyperslab: epsilon must be >= 0");
    if (!(u_norm2_ > Scalar(0))) throw std::invalid_argument("hyperslab: u must be a nonzero vector");
  }

  static HyperslabT from_sample(const SampleT<Scalar>& s, Scalar epsilon) {
    return HyperslabT(s.u, s.y, epsilon);
  }

  const Vec<Scalar>& u() const { return u_; }
  Scalar y() const { return y_; }
  Scalar epsilon() const { return epsilon_; }
  Scalar u_norm2() const { return u_norm2_; }
  Index dim() const { return u_.size(); }

  /// Membership test: |u^T a - y| <= eps, exact (no slack).
  template <typename Derived>
  bool contains(const Eigen::MatrixBase<Derived>& a) const {
    using std::abs;
    return abs(u_.dot(a.derived()) - y_) <= epsilon_;
  }

 private:
  Vec<Scalar> u_;
  Scalar y_{};
  Scalar epsilon_{};
  Scalar u_norm2_{};
};

using Hyperslab = HyperslabT<double>;

/// Ascending tuple of coordinate indices (0-based internally; external
/// interfaces report 1-based). Identifies the subspace M_J of vectors
/// supported inside the tuple.
class SupportTuple {
 public:
  SupportTuple() = default;

  explicit SupportTuple(std::vector<Index> indices) : idx_(std::move(indices)) {
    for (std::size_t i = 0; i < idx_.size(); ++i) {
      if (idx_[i] < 0) throw std::invalid_argument("support tuple: negative index");
      if (i > 0 && idx_[i] <= idx_[i - 1])
        throw std::invalid_argument("support tuple: indices must be strictly ascending");
    }
  }

  Index size() const { return static_cast<Index>(idx_.size()); }
  bool empty() const { return idx_.empty(); }
  const std::vector<Index>& indices() const { return idx_; }
  Index operator[](std::size_t i) const { return idx_[i]; }

  bool contains(Index l) const { return std::binary_search(idx_.begin(), idx_.end(), l); }

  Index max_index() const { return idx_.empty() ? Index(-1) : idx_.back(); }

  bool operator==(const SupportTuple& o) const { return idx_ == o.idx_; }
  bool operator!=(const SupportTuple& o) const { return !(*this == o); }

  /// True when every index of this tuple also appears in `o`.
  bool subset_of(const SupportTuple& o) const {
    return std::includes(o.idx_.begin(), o.idx_.end(), idx_.begin(), idx_.end());
  }

  /// Index-set intersection (used by the finite-window analysis probes).
  SupportTuple intersect(const SupportTuple& o) const {
    std::vector<Index> out;
    std::set_intersection(idx_.begin(), idx_.end(), o.idx_.begin(), o.idx_.end(),
                          std::back_inserter(out));
    return SupportTuple(std::move(out));
  }

 private:
  std::vector<Index> idx_;
};

/// True iff a_l = 0 for every l outside J (exact zero test), i.e. a lies in
/// the coordinate subspace M_J.
template <typename Derived>
bool in_subspace(const Eigen::MatrixBase<Derived>& a, const SupportTuple& J) {
  EIGEN_STATIC_ASSERT_VECTOR_ONLY(Derived);
  const auto& av = a.derived();
  if (J.max_index() >= av.size())
    throw std::invalid_argument("in_subspace: tuple index out of range for vector");
  const auto& idx = J.indices();
  std::size_t k = 0;
  for (Index l = 0; l < av.size(); ++l) {
    if (k < idx.size() && idx[k] == l) {
      ++k;
      continue;
    }
    if (av(l) != typename Derived::Scalar(0)) return false;
  }
  return true;
}

/// Indices of all exactly-nonzero components, ascending. Empty tuple for the
/// zero vector.
template <typename Derived>
SupportTuple support(const Eigen::MatrixBase<Derived>& a) {
  EIGEN_STATIC_ASSERT_VECTOR_ONLY(Derived);
  const auto& av = a.derived();
  std::vector<Index> idx;
  for (Index l = 0; l < av.size(); ++l)
    if (av(l) != typename Derived::Scalar(0)) idx.push_back(l);
  return SupportTuple(std::move(idx));
}

}  // namespace apgt
