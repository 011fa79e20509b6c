#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

#include "reflekt/errors.hpp"
#include "reflekt/linalg.hpp"

namespace reflekt::detail {

struct HullProjection {
  Vec point;
  /// Convex weights over the input points.
  Vec weights;
};

/// Euclidean projection of z onto the convex hull of `points` (Wolfe's
/// minimum-norm-point algorithm applied to the translated points p_i - z).
inline HullProjection project_onto_hull(const std::vector<Vec>& points, const Vec& z) {
  if (points.empty()) throw PreconditionError("project_onto_hull: empty point set");
  const std::size_t k = points.size();
  std::vector<Vec> q(k);
  double scale = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    q[i] = points[i] - z;
    scale = std::max(scale, q[i].squaredNorm());
  }
  const double gap_tol = 1e-15 * scale;
  const double weight_tol = 1e-13;

  std::vector<std::size_t> corral;
  std::vector<double> lambda;
  std::size_t start = 0;
  for (std::size_t i = 1; i < k; ++i) {
    if (q[i].squaredNorm() < q[start].squaredNorm()) start = i;
  }
  corral.push_back(start);
  lambda.push_back(1.0);
  Vec x = q[start];

  auto affine_minimizer = [&](const std::vector<std::size_t>& s) {
    const auto m = static_cast<Eigen::Index>(s.size());
    Mat kkt = Mat::Zero(m + 1, m + 1);
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index b = 0; b < m; ++b) {
        kkt(a, b) = q[s[static_cast<std::size_t>(a)]].dot(q[s[static_cast<std::size_t>(b)]]);
      }
      kkt(a, m) = 1.0;
      kkt(m, a) = 1.0;
    }
    Vec rhs = Vec::Zero(m + 1);
    rhs[m] = 1.0;
    Vec sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    return Vec(sol.head(m));
  };

  for (std::size_t major = 0; major < 10 * k + 100; ++major) {
    std::size_t best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) {
      const double v = x.dot(q[i]);
      if (v < best_value) {
        best_value = v;
        best = i;
      }
    }
    if (x.squaredNorm() - best_value <= gap_tol) break;
    if (std::find(corral.begin(), corral.end(), best) != corral.end()) break;
    corral.push_back(best);
    lambda.push_back(0.0);

    for (std::size_t minor = 0; minor < 10 * k + 100; ++minor) {
      const Vec mu = affine_minimizer(corral);
      bool interior = true;
      for (Eigen::Index i = 0; i < mu.size(); ++i) interior = interior && mu[i] > weight_tol;
      if (interior) {
        for (std::size_t i = 0; i < corral.size(); ++i) lambda[i] = mu[static_cast<Eigen::Index>(i)];
        break;
      }
      double theta = 1.0;
      std::size_t drop = corral.size();
      for (std::size_t i = 0; i < corral.size(); ++i) {
        const double m = mu[static_cast<Eigen::Index>(i)];
        if (m <= weight_tol && lambda[i] - m > 0.0) {
          const double t = lambda[i] / (lambda[i] - m);
          if (t < theta) {
            theta = t;
            drop = i;
          }
        }
      }
      for (std::size_t i = 0; i < corral.size(); ++i) {
        lambda[i] = theta * mu[static_cast<Eigen::Index>(i)] + (1.0 - theta) * lambda[i];
      }
      if (drop < corral.size()) lambda[drop] = 0.0;
      std::vector<std::size_t> kept_c;
      std::vector<double> kept_l;
      for (std::size_t i = 0; i < corral.size(); ++i) {
        if (lambda[i] > weight_tol) {
          kept_c.push_back(corral[i]);
          kept_l.push_back(lambda[i]);
        }
      }
      corral = std::move(kept_c);
      lambda = std::move(kept_l);
      double total = 0.0;
      for (double l : lambda) total += l;
      for (double& l : lambda) l /= total;
    }
    x.setZero();
    for (std::size_t i = 0; i < corral.size(); ++i) x += lambda[i] * q[corral[i]];
  }

  HullProjection out{x + z, Vec::Zero(static_cast<Eigen::Index>(k))};
  for (std::size_t i = 0; i < corral.size(); ++i) out.weights[static_cast<Eigen::Index>(corral[i])] = lambda[i];
  return out;
}

}  // namespace reflekt::detail
