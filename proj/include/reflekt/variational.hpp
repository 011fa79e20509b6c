#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reflekt/chamber.hpp"
#include "reflekt/detail/random.hpp"
#include "reflekt/errors.hpp"
#include "reflekt/functions.hpp"
#include "reflekt/group.hpp"
#include "reflekt/linalg.hpp"
#include "reflekt/projection.hpp"

namespace reflekt {

// ---------------------------------------------------------------------------
// Convex subgradients.

/// Refutation test for y ∈ ∂f(x): false iff some probe z has
/// f(z) < f(x) + <y, z - x> - 1e-9. Probes are structured points around x plus
/// `samples` uniform points in balls of radius 0.1, 1 and 10.
inline bool check_subgradient(const InvariantFunction& f, const Vec& x, const Vec& y, std::size_t samples = 64,
                              std::uint64_t seed = 0) {
  const auto n = x.size();
  require_dimension(x, f.group->dimension(), "check_subgradient");
  require_dimension(y, f.group->dimension(), "check_subgradient");
  if (samples < 1) throw PreconditionError("check_subgradient: samples must be positive");
  const double fx = f(x);
  if (!std::isfinite(fx)) throw PreconditionError("check_subgradient: f must be finite at x");

  auto violated = [&](const Vec& z) { return f(z) < fx + y.dot(z - x) - 1e-9; };

  std::vector<Vec> directions;
  for (Eigen::Index i = 0; i < n; ++i) directions.push_back(Vec::Unit(n, i));
  auto push_unit = [&](const Vec& v) {
    if (v.norm() > 1e-12) directions.push_back(v.normalized());
  };
  push_unit(y);
  push_unit(y.cwiseSign());
  if (x.norm() > 1e-12 && y.norm() > 1e-12) push_unit(y.normalized() - x.normalized());

  if (violated(Vec::Zero(n)) || violated(2.0 * x)) return false;
  constexpr double radii[] = {0.1, 1.0, 10.0};
  for (double r : radii) {
    for (const auto& d : directions) {
      if (violated(x + r * d) || violated(x - r * d)) return false;
    }
  }
  detail::Sampler rng(seed);
  for (std::size_t k = 0; k < samples; ++k) {
    if (violated(rng.in_ball(x, radii[k % 3]))) return false;
  }
  return true;
}

/// y ∈ ∂f(x)  <=>  y̌ ∈ ∂f(x̌) and <x̌, y̌> = <x, y>. Throws CharacterizationFailure
/// when the sides disagree; returns the shared value.
inline bool verify_lewis_characterization(const InvariantFunction& f, const Vec& x, const Vec& y,
                                          std::size_t samples = 64, std::uint64_t seed = 0) {
  const auto& rs = f.group->root_system();
  const bool lhs = check_subgradient(f, x, y, samples, seed);
  const Vec x_rep = canonical_representative(rs, x).representative;
  const Vec y_rep = canonical_representative(rs, y).representative;
  const double gap = std::abs(x_rep.dot(y_rep) - x.dot(y));
  const bool rhs = check_subgradient(f, x_rep, y_rep, samples, seed) && gap <= tol::kInnerProduct;
  if (lhs != rhs) {
    throw CharacterizationFailure(Counterexample{"subdifferential characterization (" + f.label + ")", x, y, lhs, rhs,
                                                 "inner product gap " + std::to_string(gap)});
  }
  return lhs;
}

// ---------------------------------------------------------------------------
// Proximal normals.

struct ProximalQuery {
  Vec point;
  Vec direction;
  double alpha = 1.0;
  std::reference_wrapper<const InvariantSetOracle> set_oracle;
};

/// x ∈ P_C(x + a y) for a = alpha and a = alpha / 2, decided by comparing
/// |a y| against the projection distance within 1e-9.
inline bool proximal_normal_member(const ProximalQuery& q) {
  const InvariantSetOracle& oracle = q.set_oracle.get();
  if (!(q.alpha > 0.0)) throw PreconditionError("proximal_normal_member: alpha must be positive");
  require_dimension(q.point, oracle.dimension(), "proximal_normal_member");
  require_dimension(q.direction, oracle.dimension(), "proximal_normal_member");
  if (!oracle.contains(q.point)) throw PreconditionError("proximal_normal_member: point is not in the set");
  for (double a : {q.alpha, 0.5 * q.alpha}) {
    const Vec z = q.point + a * q.direction;
    const auto projection = project_invariant(oracle, z);
    if ((z - q.point).norm() > projection.distance + tol::kProjectionDistance) return false;
  }
  return true;
}

/// y ∈ N̂_C(x)  <=>  y̌ ∈ N̂_C(x̌) and <x̌, y̌> = <x, y>, both sides tested through
/// proximal_normal_member at the same alpha.
inline bool verify_proximal_characterization(const InvariantSetOracle& oracle, const Vec& x, const Vec& y,
                                             double alpha) {
  const auto& rs = oracle.group->root_system();
  const bool lhs = proximal_normal_member({x, y, alpha, oracle});
  const Vec x_rep = canonical_representative(rs, x).representative;
  const Vec y_rep = canonical_representative(rs, y).representative;
  const double gap = std::abs(x_rep.dot(y_rep) - x.dot(y));
  const bool rhs = gap <= tol::kInnerProduct && proximal_normal_member({x_rep, y_rep, alpha, oracle});
  if (lhs != rhs) {
    throw CharacterizationFailure(Counterexample{"proximal normal characterization (" + oracle.label + ")", x, y, lhs,
                                                 rhs, "inner product gap " + std::to_string(gap)});
  }
  return lhs;
}

/// Sampled test of co O(x) ⊆ C for each boundary sample: `combinations` random
/// convex combinations of orbit points (half dense Dirichlet, half pairwise).
inline bool check_property_A(const InvariantSetOracle& oracle, const std::vector<Vec>& boundary_samples,
                             std::size_t combinations = 200, std::uint64_t seed = 0) {
  detail::Sampler rng(seed);
  for (const auto& x : boundary_samples) {
    const auto points = orbit(*oracle.group, x);
    for (std::size_t t = 0; t < combinations; ++t) {
      Vec c;
      if (t % 2 == 0 || points.size() < 2) {
        c = detail::convex_combination(points, rng.simplex_weights(points.size()));
      } else {
        const std::size_t i = rng.index(points.size());
        std::size_t j = rng.index(points.size() - 1);
        if (j >= i) ++j;
        const double l = rng.uniform();
        c = l * points[i] + (1.0 - l) * points[j];
      }
      if (!oracle.contains(c)) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Epigraphs under the extended action g(x, t) = (g x, t).

struct EpigraphPoint {
  Vec base;
  double height = 0.0;

  Vec as_vector() const {
    Vec v(base.size() + 1);
    v.head(base.size()) = base;
    v[base.size()] = height;
    return v;
  }

  static EpigraphPoint from_vector(const Vec& v) { return {Vec(v.head(v.size() - 1)), v[v.size() - 1]}; }

  EpigraphPoint transformed(const GroupElement& g) const { return {g.apply(base), height}; }

  friend double inner(const EpigraphPoint& a, const EpigraphPoint& b) {
    return a.base.dot(b.base) + a.height * b.height;
  }
};

/// block-diag(g, 1).
inline GroupElement extend(const GroupElement& g) {
  const auto n = static_cast<Eigen::Index>(g.dimension());
  Mat m = Mat::Identity(n + 1, n + 1);
  m.topLeftCorner(n, n) = g.matrix();
  return GroupElement(std::move(m), g.word());
}

/// Roots (u, 0) with the same positive indices.
inline RootSystem extended_root_system(const RootSystem& rs) {
  std::vector<Vec> roots;
  for (const auto& u : rs.roots()) {
    Vec v = Vec::Zero(u.size() + 1);
    v.head(u.size()) = u;
    roots.push_back(std::move(v));
  }
  return RootSystem::with_positive(rs.family(), std::move(roots), rs.positive_indices());
}

struct EpigraphGrid {
  double radius = 0.5;
  double coarse_step = 0.05;
  double finest_step = 1e-4;
  double refine_factor = 4.0;
  std::size_t keep = 6;
};

inline constexpr std::size_t kEpigraphMaxDimension = 3;

namespace detail {

/// Minimizes |u - c|^2 + max(f(u) - t, 0)^2 over a lattice around c that is refined
/// around the best few candidates until the step is at most grid.finest_step.
inline Vec epigraph_grid_search(const std::function<double(const Vec&)>& f, const Vec& c, double t,
                                const EpigraphGrid& grid) {
  const auto n = c.size();
  struct Candidate {
    double value;
    Vec u;
  };
  std::vector<Candidate> best;
  Vec u(n);
  auto offer = [&](double step) {
    const double fu = f(u);
    if (!std::isfinite(fu)) return;
    const double excess = std::max(fu - t, 0.0);
    const double value = (u - c).squaredNorm() + excess * excess;
    if (best.size() == grid.keep && value >= best.back().value) return;
    for (const auto& b : best) {
      if (max_abs_diff(b.u, u) < 0.5 * step) return;
    }
    auto pos = std::upper_bound(best.begin(), best.end(), value,
                                [](double v, const Candidate& b) { return v < b.value; });
    best.insert(pos, Candidate{value, u});
    if (best.size() > grid.keep) best.pop_back();
  };
  auto scan = [&](const Vec& center, double step, int half) {
    std::vector<int> k(static_cast<std::size_t>(n), -half);
    for (;;) {
      for (Eigen::Index i = 0; i < n; ++i) u[i] = center[i] + step * k[static_cast<std::size_t>(i)];
      offer(step);
      Eigen::Index i = 0;
      while (i < n && ++k[static_cast<std::size_t>(i)] > half) k[static_cast<std::size_t>(i++)] = -half;
      if (i == n) break;
    }
  };

  double step = grid.coarse_step;
  scan(c, step, static_cast<int>(std::ceil(grid.radius / step)));
  const int local = static_cast<int>(std::ceil(grid.refine_factor));
  while (step > grid.finest_step) {
    step /= grid.refine_factor;
    std::vector<Vec> centers;
    for (const auto& b : best) centers.push_back(b.u);
    for (const auto& center : centers) scan(center, step, local);
  }
  if (best.empty()) throw OracleViolationError("epigraph grid: f is infinite on the whole search box");
  return best.front().u;
}

}  // namespace detail

/// The epigraph of an invariant function as an invariant set in R^{n+1}, with a
/// grid-search chamber projector (n <= 3).
class EpigraphContext {
 public:
  explicit EpigraphContext(InvariantFunction f, EpigraphGrid grid = {}) : f_(std::move(f)), grid_(grid) {
    const std::size_t n = f_.group->dimension();
    if (n > kEpigraphMaxDimension) {
      throw DimensionCapError("epigraph grid oracle supports n <= 3, got n = " + std::to_string(n));
    }
    extended_ = std::make_shared<const FiniteGroup>(
        enumerate_group(extended_root_system(f_.group->root_system()), f_.group->size_cap()));

    auto eval = f_.eval;
    const auto grid_copy = grid_;
    const auto ext = extended_;
    oracle_.label = "epi(" + f_.label + ")";
    oracle_.group = extended_;
    oracle_.contains = [eval](const Vec& v) {
      const double fv = eval(Vec(v.head(v.size() - 1)));
      return std::isfinite(fv) && v[v.size() - 1] >= fv - tol::kProjectionDistance;
    };
    oracle_.chamber_project = [eval, grid_copy, ext](const Vec& z) {
      const auto m = z.size() - 1;
      const Vec base = z.head(m);
      const double t = z[m];
      const double fz = eval(base);
      if (std::isfinite(fz) && t >= fz) return std::vector<Vec>{z};
      const Vec u = detail::epigraph_grid_search(eval, base, t, grid_copy);
      Vec p(m + 1);
      p.head(m) = u;
      p[m] = std::max(eval(u), t);
      return std::vector<Vec>{canonical_representative(ext->root_system(), p).representative};
    };
  }

  const InvariantFunction& function() const noexcept { return f_; }
  const InvariantSetOracle& oracle() const noexcept { return oracle_; }
  const FiniteGroup& extended_group() const noexcept { return *extended_; }
  const EpigraphGrid& grid() const noexcept { return grid_; }

  Vec lift(const Vec& x) const { return EpigraphPoint{x, f_(x)}.as_vector(); }

  /// Step used for a direction d in R^{n+1}: alpha |d| = 0.25 stays inside the grid box.
  double alpha_for(const Vec& direction) const {
    const double norm = direction.norm();
    return norm > 0.0 ? 0.25 / norm : 1.0;
  }

 private:
  InvariantFunction f_;
  EpigraphGrid grid_;
  std::shared_ptr<const FiniteGroup> extended_;
  InvariantSetOracle oracle_;
};

/// Property A of epi f, sampled at the graph points (x, f(x)).
inline bool epigraph_has_property_A(const EpigraphContext& epi, const std::vector<Vec>& base_points,
                                    std::size_t combinations = 200, std::uint64_t seed = 0) {
  std::vector<Vec> lifted;
  for (const auto& x : base_points) lifted.push_back(epi.lift(x));
  return check_property_A(epi.oracle(), lifted, combinations, seed);
}

/// y ∈ ∂_p f(x) via (y, -1) ∈ N̂_epi f(x, f(x)); `singular` tests (y, 0) instead.
inline bool proximal_subgradient_member(const EpigraphContext& epi, const Vec& x, const Vec& y,
                                        bool singular = false) {
  const auto n = static_cast<Eigen::Index>(epi.function().group->dimension());
  require_dimension(x, static_cast<std::size_t>(n), "proximal_subgradient_member");
  require_dimension(y, static_cast<std::size_t>(n), "proximal_subgradient_member");
  if (!std::isfinite(epi.function()(x))) throw PreconditionError("proximal_subgradient_member: f(x) is not finite");
  const Vec d = EpigraphPoint{y, singular ? 0.0 : -1.0}.as_vector();
  if (singular && y.norm() == 0.0) return true;
  return proximal_normal_member({epi.lift(x), d, epi.alpha_for(d), epi.oracle()});
}

inline bool proximal_subgradient_member(const InvariantFunction& f, const Vec& x, const Vec& y,
                                        bool singular = false) {
  return proximal_subgradient_member(EpigraphContext(f), x, y, singular);
}

/// y ∈ ∂_p f(x)  <=>  y̌ ∈ ∂_p f(x̌) and <x̌, y̌> = <x, y> (or the singular variant).
/// Rejects functions whose epigraph fails property A at (x, f(x)) and (y, f(y)).
inline bool verify_proximal_subdiff_characterization(const EpigraphContext& epi, const Vec& x, const Vec& y,
                                                     bool singular = false) {
  const auto& f = epi.function();
  if (!epigraph_has_property_A(epi, {x, y})) {
    throw PreconditionError("epigraph of " + f.label + " fails property A");
  }
  const auto& rs = f.group->root_system();
  const bool lhs = proximal_subgradient_member(epi, x, y, singular);
  const Vec x_rep = canonical_representative(rs, x).representative;
  const Vec y_rep = canonical_representative(rs, y).representative;
  const double gap = std::abs(x_rep.dot(y_rep) - x.dot(y));
  const bool rhs = gap <= tol::kInnerProduct && proximal_subgradient_member(epi, x_rep, y_rep, singular);
  if (lhs != rhs) {
    throw CharacterizationFailure(Counterexample{std::string(singular ? "singular " : "") +
                                                     "proximal subdifferential characterization (" + f.label + ")",
                                                 x, y, lhs, rhs, "inner product gap " + std::to_string(gap)});
  }
  return lhs;
}

// ---------------------------------------------------------------------------
// Schur convexity.

/// First sampled pair x ≽_G w with f(x) < f(w) - 1e-10, where w is a Dirichlet
/// combination of the orbit of a Gaussian x and the relation is certified by LP.
inline std::optional<Counterexample> find_schur_violation(const InvariantFunction& f, const FiniteGroup& group,
                                                          std::size_t trials, std::uint64_t seed = 0) {
  if (trials < 1) throw PreconditionError("check_schur_convex: trials must be positive");
  detail::Sampler rng(seed);
  const auto n = static_cast<Eigen::Index>(group.dimension());
  for (std::size_t t = 0; t < trials; ++t) {
    const Vec x = rng.gaussian(n, 2.0);
    const auto points = orbit(group, x);
    const Vec w = detail::convex_combination(points, rng.simplex_weights(points.size()));
    if (!group_majorizes(group, x, w).holds) {
      throw NumericalError("schur check: sampled pair not certified as majorized");
    }
    const double fx = f(x);
    const double fw = f(w);
    if (fx < fw - 1e-10) {
      return Counterexample{"schur convexity (" + f.label + ")", x, w, false, true,
                            "f(x) = " + std::to_string(fx) + " < f(w) = " + std::to_string(fw)};
    }
  }
  return std::nullopt;
}

inline bool check_schur_convex(const InvariantFunction& f, const FiniteGroup& group, std::size_t trials,
                               std::uint64_t seed = 0) {
  return !find_schur_violation(f, group, trials, seed).has_value();
}

}  // namespace reflekt
