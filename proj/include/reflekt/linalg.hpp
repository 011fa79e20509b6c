#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "reflekt/errors.hpp"

namespace reflekt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Default tolerances. Every routine that uses one accepts an override.
namespace tol {
inline constexpr double kUnitNorm = 1e-12;
inline constexpr double kRootClosure = 1e-10;
inline constexpr double kOrthogonal = 1e-10;
inline constexpr double kMatrixDedup = 1e-8;
inline constexpr double kZero = 1e-9;
inline constexpr double kChamberSlack = 1e-10;
inline constexpr double kFixedPoint = 1e-8;
inline constexpr double kInnerProduct = 1e-8;
inline constexpr double kSquaredDistance = 1e-8;
inline constexpr double kProjectionDistance = 1e-9;
}  // namespace tol

inline void require_dimension(const Vec& v, std::size_t n, const char* what) {
  if (static_cast<std::size_t>(v.size()) != n) {
    throw PreconditionError(std::string(what) + ": expected dimension " + std::to_string(n) +
                            ", got " + std::to_string(v.size()));
  }
}

inline double max_abs_diff(const Mat& a, const Mat& b) { return (a - b).cwiseAbs().maxCoeff(); }

inline double max_abs_diff(const Vec& a, const Vec& b) {
  return a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
}

/// Strict lexicographic order on equal-length vectors.
inline bool lex_less(const Vec& a, const Vec& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

inline std::size_t count_nonzero(const Vec& v) {
  return static_cast<std::size_t>((v.array() != 0.0).count());
}

namespace detail {

/// Fixed pseudo-generic weights used to hash vectors and matrices to a scalar.
inline Vec generic_weights(std::size_t n, double phase) {
  Vec w(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    w[static_cast<Eigen::Index>(i)] = 1.0 + 0.5 * std::sin(phase + 1.618033988749895 * static_cast<double>(i + 1));
  }
  return w;
}

/// Tolerance-aware lookup of previously seen vectors or matrices.
///
/// Items are bucketed by a scalar linear key; two items whose max-norm distance
/// is below `tolerance` always have keys within `tolerance * key_bound`, so only
/// that key window is scanned.
template <typename Item>
class NearIndex {
 public:
  NearIndex(Eigen::Index rows, Eigen::Index cols, double tolerance)
      : left_(generic_weights(static_cast<std::size_t>(rows), 0.3)),
        right_(generic_weights(static_cast<std::size_t>(cols), 1.7)),
        tolerance_(tolerance),
        key_slack_(tolerance * left_.cwiseAbs().sum() * right_.cwiseAbs().sum() * 1.000001) {}

  std::optional<std::size_t> find(const Item& item) const {
    const double k = key(item);
    for (auto it = keys_.lower_bound(k - key_slack_); it != keys_.end() && it->first <= k + key_slack_;
         ++it) {
      if (max_abs_diff(items_[it->second], item) < tolerance_) return it->second;
    }
    return std::nullopt;
  }

  /// Inserts `item` unless an equivalent one exists; returns (index, inserted).
  std::pair<std::size_t, bool> insert(const Item& item) {
    if (auto hit = find(item)) return {*hit, false};
    items_.push_back(item);
    keys_.emplace(key(item), items_.size() - 1);
    return {items_.size() - 1, true};
  }

  std::size_t size() const noexcept { return items_.size(); }
  const std::vector<Item>& items() const noexcept { return items_; }

 private:
  double key(const Item& item) const {
    if constexpr (Item::ColsAtCompileTime == 1) {
      return left_.dot(item);
    } else {
      return left_.dot(item * right_);
    }
  }

  Vec left_;
  Vec right_;
  double tolerance_;
  double key_slack_;
  std::vector<Item> items_;
  std::multimap<double, std::size_t> keys_;
};

}  // namespace detail

/// Removes near-duplicates (max-norm distance below `tolerance`), keeping first occurrences.
inline std::vector<Vec> dedup_points(const std::vector<Vec>& points, double tolerance = tol::kMatrixDedup) {
  if (points.empty()) return {};
  detail::NearIndex<Vec> index(points.front().size(), 1, tolerance);
  for (const auto& p : points) index.insert(p);
  return index.items();
}

/// Set equality of two finite point sets up to `tolerance` in max-norm.
inline bool same_point_set(const std::vector<Vec>& a, const std::vector<Vec>& b, double tolerance) {
  auto covered = [tolerance](const std::vector<Vec>& from, const std::vector<Vec>& to) {
    return std::all_of(from.begin(), from.end(), [&](const Vec& p) {
      return std::any_of(to.begin(), to.end(), [&](const Vec& q) { return max_abs_diff(p, q) <= tolerance; });
    });
  };
  return covered(a, b) && covered(b, a);
}

}  // namespace reflekt
