#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "reflekt/linalg.hpp"

namespace reflekt::detail {

/// Seeded sampler used by every randomized check; identical seeds give identical streams.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal() { return normal_(engine_); }

  std::size_t index(std::size_t size) {
    return std::uniform_int_distribution<std::size_t>(0, size - 1)(engine_);
  }

  Vec gaussian(Eigen::Index n, double scale = 1.0) {
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = scale * normal();
    return v;
  }

  Vec unit_vector(Eigen::Index n) {
    for (;;) {
      Vec v = gaussian(n);
      const double norm = v.norm();
      if (norm > 1e-12) return v / norm;
    }
  }

  /// Uniform point of the ball of the given radius around `center`.
  Vec in_ball(const Vec& center, double radius) {
    const auto n = center.size();
    const double r = radius * std::pow(uniform(), 1.0 / static_cast<double>(n));
    return center + r * unit_vector(n);
  }

  /// Dirichlet(1, ..., 1) weights.
  Vec simplex_weights(std::size_t k) {
    Vec w(static_cast<Eigen::Index>(k));
    std::exponential_distribution<double> expo(1.0);
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = expo(engine_);
    return w / w.sum();
  }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

inline Vec convex_combination(const std::vector<Vec>& points, const Vec& weights) {
  Vec out = Vec::Zero(points.front().size());
  for (std::size_t i = 0; i < points.size(); ++i) out += weights[static_cast<Eigen::Index>(i)] * points[i];
  return out;
}

}  // namespace reflekt::detail
