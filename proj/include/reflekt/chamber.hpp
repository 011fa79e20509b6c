#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "reflekt/detail/simplex.hpp"
#include "reflekt/errors.hpp"
#include "reflekt/group.hpp"
#include "reflekt/linalg.hpp"
#include "reflekt/root_system.hpp"

namespace reflekt {

/// Closed fundamental chamber test: <x, u> >= -slack for every positive root u.
inline bool in_chamber(const RootSystem& rs, const Vec& x, double slack = tol::kChamberSlack) {
  require_dimension(x, rs.dimension(), "in_chamber");
  for (const auto& u : rs.positive_roots()) {
    if (u.dot(x) < -slack) return false;
  }
  return true;
}

/// x together with its chamber representative and the element mapping one to the other.
struct ChamberDecomposition {
  Vec input;
  Vec representative;
  /// element.apply(input) == representative; element.word() is always set.
  GroupElement element;

  const GroupElement::Word& word() const { return *element.word(); }
};

/// Maps x to the unique point of its orbit inside the closed fundamental chamber.
///
/// Repeatedly reflects across the most violated positive root (lowest index on
/// ties) until no root has <x, u> < -violation_tol * max(1, |x|). Each step
/// strictly increases <x, w> for the interior functional w, so the walk is finite.
inline ChamberDecomposition canonical_representative(const RootSystem& rs, const Vec& x,
                                                     double violation_tol = 1e-12) {
  require_dimension(x, rs.dimension(), "canonical_representative");
  const auto& positive = rs.positive_roots();
  const double threshold = -violation_tol * std::max(1.0, x.norm());
  const std::size_t cap = rs.roots().size() * 50;

  std::vector<Vec> directions;
  std::vector<double> scales;
  for (const auto& u : positive) {
    directions.push_back(reflection_direction(u));
    scales.push_back(2.0 / directions.back().squaredNorm());
  }

  Vec current = x;
  const auto n = static_cast<Eigen::Index>(rs.dimension());
  Mat g = Mat::Identity(n, n);
  GroupElement::Word word;
  for (std::size_t steps = 0;; ++steps) {
    std::size_t worst = positive.size();
    double worst_value = threshold;
    for (std::size_t i = 0; i < positive.size(); ++i) {
      const double d = positive[i].dot(current);
      if (d < worst_value) {
        worst_value = d;
        worst = i;
      }
    }
    if (worst == positive.size()) break;
    if (steps >= cap) {
      throw IterationCapError("chamber walk did not terminate within " + std::to_string(cap) + " reflections");
    }
    const Vec& r = directions[worst];
    current -= scales[worst] * r.dot(current) * r;
    g -= scales[worst] * r * (r.transpose() * g);
    word.push_back(worst);
  }
  return ChamberDecomposition{x, current, GroupElement(std::move(g), std::move(word))};
}

/// The chamber point with prescribed inner products against the simple roots
/// (its distances to the chamber walls), plus the component of `free_part`
/// orthogonal to the span of the roots. Zero entries put the point exactly on
/// the corresponding walls.
inline Vec chamber_point(const RootSystem& rs, const Vec& wall_values, const Vec& free_part) {
  const auto& simple = rs.simple_indices();
  if (static_cast<std::size_t>(wall_values.size()) != simple.size()) {
    throw PreconditionError("chamber_point: expected one value per simple root");
  }
  require_dimension(free_part, rs.dimension(), "chamber_point");
  const auto n = static_cast<Eigen::Index>(rs.dimension());
  Mat s(n, static_cast<Eigen::Index>(simple.size()));
  for (std::size_t j = 0; j < simple.size(); ++j) s.col(static_cast<Eigen::Index>(j)) = rs.positive_roots()[simple[j]];
  const Mat gram = s.transpose() * s;
  const Vec coeffs = gram.ldlt().solve(wall_values);
  const Vec along = s * coeffs;
  const Vec orth = free_part - s * gram.ldlt().solve(s.transpose() * free_part);
  return along + orth;
}

/// Outcome of a group-majorization query x >=_G y, i.e. y in co O(x).
struct MajorizationVerdict {
  Vec dominant;
  Vec dominated;
  bool holds = false;
  /// When holds: orbit points of `dominant` and convex weights reproducing `dominated`.
  std::vector<Vec> orbit_points;
  Vec weights;
};

/// Decides y in co O(x) by a phase-1 simplex over the enumerated orbit of x.
inline MajorizationVerdict group_majorizes(const FiniteGroup& group, const Vec& x, const Vec& y) {
  require_dimension(x, group.dimension(), "group_majorizes");
  require_dimension(y, group.dimension(), "group_majorizes");
  MajorizationVerdict out{x, y, false, {}, Vec()};
  const auto points = orbit(group, x);
  const auto n = static_cast<Eigen::Index>(group.dimension());
  const auto k = static_cast<Eigen::Index>(points.size());
  const double scale = std::max({1.0, x.norm(), y.norm()});

  Mat a(n + 1, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    a.col(j).head(n) = points[static_cast<std::size_t>(j)] / scale;
    a(n, j) = 1.0;
  }
  Vec b(n + 1);
  b.head(n) = y / scale;
  b[n] = 1.0;

  auto lambda = detail::phase_one_feasible(a, b);
  if (!lambda) return out;
  Vec combo = Vec::Zero(n);
  for (Eigen::Index j = 0; j < k; ++j) combo += (*lambda)[j] * points[static_cast<std::size_t>(j)];
  if (max_abs_diff(combo, y) > tol::kInnerProduct || std::abs(lambda->sum() - 1.0) > tol::kInnerProduct) return out;
  out.holds = true;
  out.orbit_points = points;
  out.weights = std::move(*lambda);
  return out;
}

}  // namespace reflekt
