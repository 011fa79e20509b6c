#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "reflekt/chamber.hpp"
#include "reflekt/detail/min_norm_point.hpp"
#include "reflekt/errors.hpp"
#include "reflekt/group.hpp"
#include "reflekt/linalg.hpp"

namespace reflekt {

/// A closed set invariant under a finite reflection group, described by a
/// membership test and a projector that only has to handle chamber points.
struct InvariantSetOracle {
  std::string label;
  std::function<bool(const Vec&)> contains;
  /// Maps a chamber point to P_C(point) ∩ chamber (finite, nonempty).
  std::function<std::vector<Vec>(const Vec&)> chamber_project;
  std::shared_ptr<const FiniteGroup> group;

  std::size_t dimension() const { return group->dimension(); }
};

/// All nearest points of a set to `query`, kept together with the chamber data
/// they were reconstructed from: points = to_chamber^-1 · C_G(x̌) · chamber_projections.
struct ProjectionSet {
  Vec query;
  double distance = 0.0;
  std::vector<Vec> chamber_projections;
  GroupElement to_chamber;
  /// Enumerated C_G(x̌) when the projection went through an enumerated group.
  std::optional<Stabilizer> stabilizer;
  std::size_t stabilizer_order = 1;
  std::vector<Vec> points;

  /// Deterministic representative: the lexicographically smallest point.
  const Vec& lexicographic_min() const {
    return *std::min_element(points.begin(), points.end(), lex_less);
  }
};

/// Full projection set of x onto the oracle's set via chamber reduction.
inline ProjectionSet project_invariant(const InvariantSetOracle& oracle, const Vec& x) {
  const FiniteGroup& group = *oracle.group;
  require_dimension(x, group.dimension(), "project_invariant");
  const auto& rs = group.root_system();

  auto dec = canonical_representative(rs, x);
  const Vec& rep = dec.representative;
  auto chamber_points = oracle.chamber_project(rep);
  if (chamber_points.empty()) throw OracleViolationError(oracle.label + ": chamber projector returned no point");

  const double distance = (rep - chamber_points.front()).norm();
  for (const auto& y : chamber_points) {
    if (!in_chamber(rs, y)) throw OracleViolationError(oracle.label + ": chamber projection leaves the chamber");
    if (!oracle.contains(y)) throw OracleViolationError(oracle.label + ": chamber projection is not in the set");
    if (std::abs((rep - y).norm() - distance) > tol::kProjectionDistance) {
      throw OracleViolationError(oracle.label + ": chamber projections are at different distances");
    }
  }

  auto stab = stabilizer(group, rep);
  const GroupElement back = dec.element.inverse();
  std::vector<Vec> raw;
  raw.reserve(stab.elements.size() * chamber_points.size());
  for (const auto& h : stab.elements) {
    for (const auto& y : chamber_points) raw.push_back(back.matrix() * (h.matrix() * y));
  }
  auto points = dedup_points(raw, tol::kProjectionDistance);
  for (const auto& p : points) {
    if (!oracle.contains(p)) throw OracleViolationError(oracle.label + ": reconstructed projection is not in the set");
    if (std::abs((p - x).norm() - distance) > tol::kProjectionDistance) {
      throw OracleViolationError(oracle.label + ": reconstructed projection is off the projection distance");
    }
  }
  const std::size_t order = stab.order();
  return ProjectionSet{x, distance, std::move(chamber_points), std::move(dec.element), std::move(stab), order,
                       std::move(points)};
}

namespace detail {

inline bool on_projection_set(const Vec& x, const Vec& y, double distance) {
  return std::abs((x - y).squaredNorm() - distance * distance) <= tol::kSquaredDistance;
}

}  // namespace detail

/// Checks y in P_C(x)  <=>  y̌ in P_C(x̌) and <x̌, y̌> = <x, y>, throwing
/// CharacterizationFailure when the two sides disagree. Returns the shared value.
inline bool verify_projection_characterization(const InvariantSetOracle& oracle, const Vec& x, const Vec& y) {
  require_dimension(y, oracle.dimension(), "verify_projection_characterization");
  if (!oracle.contains(y)) throw PreconditionError("verify_projection_characterization: y is not in the set");
  const auto& rs = oracle.group->root_system();

  const auto full = project_invariant(oracle, x);
  const bool lhs = detail::on_projection_set(x, y, full.distance);

  const Vec x_rep = canonical_representative(rs, x).representative;
  const Vec y_rep = canonical_representative(rs, y).representative;
  const auto reduced = project_invariant(oracle, x_rep);
  const double gap = std::abs(x_rep.dot(y_rep) - x.dot(y));
  const bool rhs = detail::on_projection_set(x_rep, y_rep, reduced.distance) && gap <= tol::kInnerProduct;

  if (lhs != rhs) {
    throw CharacterizationFailure(
        Counterexample{"projection characterization", x, y, lhs, rhs, "inner product gap " + std::to_string(gap)});
  }
  return lhs;
}

/// Samples points and checks contains(g x) == contains(x) for every enumerated g.
inline bool check_oracle_invariance(const InvariantSetOracle& oracle, const std::vector<Vec>& samples) {
  for (const auto& x : samples) {
    const bool base = oracle.contains(x);
    for (const auto& g : oracle.group->elements()) {
      if (oracle.contains(g.matrix() * x) != base) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Built-in invariant sets.

inline InvariantSetOracle ball_oracle(std::shared_ptr<const FiniteGroup> group, double radius) {
  if (radius < 0.0) throw PreconditionError("ball radius must be nonnegative");
  InvariantSetOracle o;
  o.label = "ball(" + std::to_string(radius) + ")";
  o.group = std::move(group);
  o.contains = [radius](const Vec& x) { return x.norm() <= radius + tol::kProjectionDistance; };
  o.chamber_project = [radius](const Vec& x) {
    const double n = x.norm();
    return std::vector<Vec>{n <= radius ? x : Vec(x * (radius / n))};
  };
  return o;
}

inline InvariantSetOracle sphere_oracle(std::shared_ptr<const FiniteGroup> group, double radius) {
  if (radius <= 0.0) throw PreconditionError("sphere radius must be positive");
  InvariantSetOracle o;
  o.label = "sphere(" + std::to_string(radius) + ")";
  o.group = std::move(group);
  o.contains = [radius](const Vec& x) { return std::abs(x.norm() - radius) <= tol::kProjectionDistance; };
  o.chamber_project = [radius](const Vec& x) {
    const double n = x.norm();
    if (n <= tol::kZero) throw OracleViolationError("sphere: every point is nearest to the center");
    return std::vector<Vec>{x * (radius / n)};
  };
  return o;
}

namespace detail {

/// Candidates this close to the best distance count as tied nearest points.
inline constexpr double kTieDistance = 5e-10;

inline bool is_signed_permutation(const Mat& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    int nonzero = 0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      if (std::abs(v) > tol::kRootClosure) {
        if (std::abs(std::abs(v) - 1.0) > tol::kRootClosure) return false;
        ++nonzero;
      }
    }
    if (nonzero != 1) return false;
  }
  return true;
}

}  // namespace detail

/// The box [-half_width, half_width]^n; requires a group of signed permutations.
inline InvariantSetOracle box_oracle(std::shared_ptr<const FiniteGroup> group, double half_width) {
  if (half_width < 0.0) throw PreconditionError("box half width must be nonnegative");
  for (const auto& g : group->elements()) {
    if (!detail::is_signed_permutation(g.matrix())) {
      throw PreconditionError("box is only invariant under signed permutation groups");
    }
  }
  InvariantSetOracle o;
  o.label = "box(" + std::to_string(half_width) + ")";
  o.group = std::move(group);
  o.contains = [half_width](const Vec& x) {
    return x.size() == 0 || x.cwiseAbs().maxCoeff() <= half_width + tol::kProjectionDistance;
  };
  o.chamber_project = [half_width](const Vec& x) {
    return std::vector<Vec>{Vec(x.cwiseMax(-half_width).cwiseMin(half_width))};
  };
  return o;
}

/// Union of the orbits of finitely many points.
inline InvariantSetOracle finite_orbits_oracle(std::shared_ptr<const FiniteGroup> group,
                                               const std::vector<Vec>& generators) {
  if (generators.empty()) throw PreconditionError("finite orbit set needs at least one generator");
  std::vector<Vec> all;
  for (const auto& p : generators) {
    auto o = orbit(*group, p);
    all.insert(all.end(), o.begin(), o.end());
  }
  auto points = std::make_shared<const std::vector<Vec>>(dedup_points(all));
  InvariantSetOracle o;
  o.label = "orbits(" + std::to_string(generators.size()) + ")";
  o.contains = [points](const Vec& x) {
    return std::any_of(points->begin(), points->end(),
                       [&](const Vec& p) { return max_abs_diff(p, x) <= tol::kProjectionDistance; });
  };
  o.chamber_project = [points, g = group](const Vec& x) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : *points) best = std::min(best, (p - x).norm());
    std::vector<Vec> out;
    for (const auto& p : *points) {
      if ((p - x).norm() <= best + detail::kTieDistance && in_chamber(g->root_system(), p)) out.push_back(p);
    }
    return out;
  };
  o.group = std::move(group);
  return o;
}

/// co O(p): the convex hull of a single orbit.
inline InvariantSetOracle orbit_hull_oracle(std::shared_ptr<const FiniteGroup> group, const Vec& p) {
  auto vertices = std::make_shared<const std::vector<Vec>>(orbit(*group, p));
  InvariantSetOracle o;
  o.label = "hull";
  o.group = std::move(group);
  o.contains = [vertices](const Vec& x) {
    return (detail::project_onto_hull(*vertices, x).point - x).norm() <= tol::kProjectionDistance;
  };
  o.chamber_project = [vertices](const Vec& x) {
    return std::vector<Vec>{detail::project_onto_hull(*vertices, x).point};
  };
  return o;
}

/// Union of orbit hulls co O(p_1) ∪ ... ∪ co O(p_k); nonconvex in general.
inline InvariantSetOracle hull_union_oracle(std::shared_ptr<const FiniteGroup> group, const std::vector<Vec>& generators) {
  if (generators.empty()) throw PreconditionError("hull union needs at least one generator");
  auto hulls = std::make_shared<std::vector<std::vector<Vec>>>();
  for (const auto& p : generators) hulls->push_back(orbit(*group, p));
  InvariantSetOracle o;
  o.label = "hull-union(" + std::to_string(generators.size()) + ")";
  o.group = std::move(group);
  o.contains = [hulls](const Vec& x) {
    return std::any_of(hulls->begin(), hulls->end(), [&](const std::vector<Vec>& h) {
      return (detail::project_onto_hull(h, x).point - x).norm() <= tol::kProjectionDistance;
    });
  };
  o.chamber_project = [hulls](const Vec& x) {
    std::vector<Vec> candidates;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& h : *hulls) {
      candidates.push_back(detail::project_onto_hull(h, x).point);
      best = std::min(best, (candidates.back() - x).norm());
    }
    std::vector<Vec> out;
    for (const auto& c : candidates) {
      if ((c - x).norm() <= best + detail::kTieDistance) out.push_back(c);
    }
    return dedup_points(out, tol::kProjectionDistance);
  };
  return o;
}

}  // namespace reflekt
