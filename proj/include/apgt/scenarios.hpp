#pragma once

#include "apgt/core_model.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

namespace apgt {

/// Standard-normal stream on top of mt19937_64 via the Box-Muller transform.
/// Both pieces are fully specified, so a reimplementation can reproduce the
/// stream from (seed, stream id) alone; std::normal_distribution is avoided
/// because its algorithm is implementation-defined.
class NormalSampler {
 public:
  static constexpr const char* kGeneratorName = "mt19937_64/box-muller";

  explicit NormalSampler(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32)};
    eng_.seed(seq);
  }

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open();   // (0, 1]
    const double u2 = uniform_right();  // [0, 1)
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Unbiased integer in [0, n) by rejection; n >= 1.
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return x % n;
  }

 private:
  double uniform_open() { return static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53; }
  double uniform_right() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Synthetic experiment description: Gaussian sensing of a K*-sparse vector
/// under AWGN, with an optional abrupt support change mid-stream.
struct ScenarioConfig {
  Index L = 1024;
  Index K_star = 100;
  double sigma2 = 0.1;
  Index N = 1500;
  std::uint64_t seed = 1;
  std::optional<Index> change_at;
  Index change_count = 0;

  void validate() const {
    if (L < 2) throw std::invalid_argument("scenario: L must be >= 2");
    if (K_star < 1 || K_star > L) throw std::invalid_argument("scenario: K_star must lie in [1, L]");
    if (sigma2 < 0) throw std::invalid_argument("scenario: sigma2 must be >= 0");
    if (N < 0) throw std::invalid_argument("scenario: N must be >= 0");
    if (change_at && (*change_at < 0 || *change_at >= N))
      throw std::invalid_argument("scenario: change_at must lie in [0, N)");
    if (change_at && change_count < 1)
      throw std::invalid_argument("scenario: change_count must be >= 1 when change_at is set");
  }

  ScenarioConfig with_seed(std::uint64_t s) const {
    ScenarioConfig c = *this;
    c.seed = s;
    return c;
  }
};

namespace detail {

// First `count` entries of a partial Fisher-Yates shuffle of `pool`.
inline std::vector<Index> draw_positions(std::vector<Index> pool, Index count,
                                         NormalSampler& rng) {
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) {
    const std::uint64_t j = rng.bounded(pool.size() - static_cast<std::uint64_t>(i));
    std::swap(pool[static_cast<std::size_t>(i) + j], pool[static_cast<std::size_t>(i)]);
    out.push_back(pool[static_cast<std::size_t>(i)]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

/// K*-sparse ground truth: uniformly random support, i.i.d. standard-normal
/// values assigned in ascending position order.
inline Eigen::VectorXd generate_ground_truth(const ScenarioConfig& cfg) {
  cfg.validate();
  NormalSampler rng(cfg.seed, 0);
  std::vector<Index> pool(static_cast<std::size_t>(cfg.L));
  std::iota(pool.begin(), pool.end(), Index(0));
  const auto positions = detail::draw_positions(std::move(pool), cfg.K_star, rng);

  Eigen::VectorXd a = Eigen::VectorXd::Zero(cfg.L);
  for (Index p : positions) {
    double v;
    do {
      v = rng.next();
    } while (v == 0.0);
    a(p) = v;
  }
  return a;
}

struct Stream {
  std::vector<Sample> samples;
  Eigen::VectorXd a_star_post;  // ground truth after the change event (== pre if none)
};

/// Observation stream y_n = u_n^T a*(n) + v_n with N(0,1) sensing entries and
/// N(0, sigma2) noise. At change_at, change_count previously-zero coordinates
/// switch to fresh standard-normal values.
inline Stream generate_stream(const ScenarioConfig& cfg, const Eigen::VectorXd& a_star) {
  cfg.validate();
  if (a_star.size() != cfg.L) throw std::invalid_argument("generate_stream: dimension mismatch");

  NormalSampler rng(cfg.seed, 1);
  const double sigma = std::sqrt(cfg.sigma2);
  Eigen::VectorXd a_cur = a_star;

  Stream out;
  out.samples.reserve(static_cast<std::size_t>(cfg.N));
  for (Index n = 0; n < cfg.N; ++n) {
    if (cfg.change_at && n == *cfg.change_at) {
      std::vector<Index> zeros;
      for (Index l = 0; l < cfg.L; ++l)
        if (a_cur(l) == 0.0) zeros.push_back(l);
      if (cfg.change_count > static_cast<Index>(zeros.size()))
        throw std::invalid_argument("generate_stream: change_count exceeds zero coordinates");
      const auto flips = detail::draw_positions(std::move(zeros), cfg.change_count, rng);
      for (Index p : flips) {
        double v;
        do {
          v = rng.next();
        } while (v == 0.0);
        a_cur(p) = v;
      }
    }
    Sample s;
    s.n = n;
    s.u.resize(cfg.L);
    for (Index l = 0; l < cfg.L; ++l) s.u(l) = rng.next();
    s.y = s.u.dot(a_cur) + sigma * rng.next();
    out.samples.push_back(std::move(s));
  }
  out.a_star_post = std::move(a_cur);
  return out;
}

/// Constant hyperslab tolerances eps_n = multiplier * sigma.
inline std::vector<double> default_epsilons(const ScenarioConfig& cfg, double multiplier = 1.3) {
  cfg.validate();
  if (multiplier < 0) throw std::invalid_argument("default_epsilons: multiplier must be >= 0");
  return std::vector<double>(static_cast<std::size_t>(cfg.N), multiplier * std::sqrt(cfg.sigma2));
}

/// Ground truth as a function of time (step change at change_at, if any).
struct GroundTruthTimeline {
  Eigen::VectorXd before;
  Eigen::VectorXd after;
  std::optional<Index> change_at;

  const Eigen::VectorXd& at(Index n) const {
    return (change_at && n >= *change_at) ? after : before;
  }
};

}  // namespace apgt
