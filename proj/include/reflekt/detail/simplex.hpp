#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "reflekt/linalg.hpp"

namespace reflekt::detail {

/// Phase-1 simplex for { lambda >= 0 : A lambda = b }.
///
/// Dense tableau with one artificial variable per row and Bland's rule, so it
/// terminates on degenerate problems. Returns a feasible lambda, or nullopt when
/// the minimal total artificial mass exceeds `feasibility_tol`.
inline std::optional<Vec> phase_one_feasible(const Mat& a, const Vec& b, double feasibility_tol = 1e-9,
                                             double pivot_tol = 1e-12) {
  const auto rows = a.rows();
  const auto cols = a.cols();
  const auto width = cols + rows + 1;  // structural | artificial | rhs
  Mat t = Mat::Zero(rows, width);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double sign = b[i] < 0.0 ? -1.0 : 1.0;
    t.row(i).head(cols) = sign * a.row(i);
    t(i, cols + i) = 1.0;
    t(i, width - 1) = sign * b[i];
  }
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(rows));
  for (Eigen::Index i = 0; i < rows; ++i) basis[static_cast<std::size_t>(i)] = cols + i;

  // Reduced costs of min sum(artificials): c_j - sum over rows of t(i, j).
  Vec cost = Vec::Zero(width);
  for (Eigen::Index j = 0; j < cols; ++j) cost[j] = -t.col(j).sum();
  cost[width - 1] = -t.col(width - 1).sum();

  const std::size_t max_pivots = 50 * static_cast<std::size_t>(width) + 1000;
  for (std::size_t pivots = 0; pivots < max_pivots; ++pivots) {
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < width - 1; ++j) {
      if (cost[j] < -pivot_tol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;

    Eigen::Index leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (t(i, enter) <= pivot_tol) continue;
      const double ratio = t(i, width - 1) / t(i, enter);
      if (ratio < best - 1e-15 ||
          (ratio <= best + 1e-15 && leave >= 0 &&
           basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
        best = std::min(best, ratio);
        leave = i;
      }
    }
    if (leave < 0) break;  // unbounded direction cannot occur for phase 1

    t.row(leave) /= t(leave, enter);
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (i != leave && t(i, enter) != 0.0) t.row(i) -= t(i, enter) * t.row(leave);
    }
    cost -= cost[enter] * t.row(leave).transpose();
    basis[static_cast<std::size_t>(leave)] = enter;
  }

  double artificial = 0.0;
  Vec lambda = Vec::Zero(cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto var = basis[static_cast<std::size_t>(i)];
    if (var < cols) {
      lambda[var] = std::max(0.0, t(i, width - 1));
    } else {
      artificial += std::abs(t(i, width - 1));
    }
  }
  if (artificial > feasibility_tol) return std::nullopt;
  return lambda;
}

}  // namespace reflekt::detail
