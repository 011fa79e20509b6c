#pragma once

#include <cstddef>
#include <cstdint>
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
#include "reflekt/projection.hpp"
#include "reflekt/variational.hpp"

namespace reflekt::harness {

/// Outcome of a randomized verification run. `counterexample` records a
/// disagreement between the two sides of a characterization; `failure` records
/// any other expectation the run did not meet.
struct Report {
  std::string check;
  std::size_t trials = 0;
  /// Trials whose shared verdict was true; the rest exercised the false direction.
  std::size_t true_cases = 0;
  std::optional<Counterexample> counterexample;
  std::string failure;

  bool passed() const { return !counterexample && failure.empty(); }
};

using GroupPtr = std::shared_ptr<const FiniteGroup>;

/// A chamber point whose wall values are zero with probability `zero_probability`
/// and uniform in [0.1, 2] otherwise.
inline Vec random_chamber_point(const RootSystem& rs, detail::Sampler& rng, double zero_probability = 0.3) {
  Vec walls(static_cast<Eigen::Index>(rs.simple_indices().size()));
  for (Eigen::Index i = 0; i < walls.size(); ++i) walls[i] = rng.uniform() < zero_probability ? 0.0 : rng.uniform(0.1, 2.0);
  return chamber_point(rs, walls, rng.gaussian(static_cast<Eigen::Index>(rs.dimension())));
}

inline const GroupElement& random_element(const FiniteGroup& g, detail::Sampler& rng) {
  return g.elements()[rng.index(g.order())];
}

inline bool is_signed_permutation_family(const FiniteGroup& g) {
  const auto f = g.root_system().family();
  return f == Family::A || f == Family::B || f == Family::D;
}

/// The convex test functions compatible with the group.
inline std::vector<InvariantFunction> convex_test_functions(const GroupPtr& g) {
  std::vector<InvariantFunction> out;
  if (is_signed_permutation_family(*g)) {
    out.push_back(functions::max_norm(g));
    out.push_back(functions::l1_norm(g));
  }
  if (g->root_system().family() == Family::A) out.push_back(functions::sum_largest(g, std::max<std::size_t>(1, g->dimension() / 2)));
  out.push_back(functions::distance_to_ball(g, 1.0));
  return out;
}

namespace detail {

inline Vec random_subgradient(const InvariantFunction& f, const Vec& x, reflekt::detail::Sampler& rng) {
  const auto extremes = f.subgradients(x);
  if (extremes.size() == 1 || rng.uniform() < 0.3) return extremes[rng.index(extremes.size())];
  return reflekt::detail::convex_combination(extremes, rng.simplex_weights(extremes.size()));
}

/// Subgradient pair (x, y): y is a true subgradient half of the time, otherwise
/// a wrongly rotated, perturbed or random vector.
inline std::pair<Vec, Vec> subgradient_query(const InvariantFunction& f, reflekt::detail::Sampler& rng) {
  const FiniteGroup& g = *f.group;
  const Vec x_rep = random_chamber_point(g.root_system(), rng);
  const Vec y_rep = random_subgradient(f, x_rep, rng);
  const GroupElement& h = random_element(g, rng);
  const Vec x = h.apply(x_rep);
  const double u = rng.uniform();
  if (u < 0.5) return {x, h.apply(y_rep)};
  if (u < 0.7) return {x, random_element(g, rng).apply(y_rep)};
  if (u < 0.85) return {x, h.apply(y_rep) + rng.gaussian(x.size(), 0.3)};
  return {x, rng.gaussian(x.size())};
}

}  // namespace detail

/// Subdifferential characterization on `trials` queries per compatible convex test function.
inline Report run_thm31(const GroupPtr& g, std::size_t trials, std::uint64_t seed,
                        std::vector<InvariantFunction> fs = {}) {
  Report r;
  r.check = "thm31";
  if (fs.empty()) fs = convex_test_functions(g);
  reflekt::detail::Sampler rng(seed);
  for (const auto& f : fs) {
    for (std::size_t t = 0; t < trials; ++t) {
      const auto [x, y] = detail::subgradient_query(f, rng);
      try {
        r.true_cases += verify_lewis_characterization(f, x, y, 32, seed + t) ? 1 : 0;
      } catch (const CharacterizationFailure& e) {
        r.counterexample = e.counterexample();
        return r;
      }
      ++r.trials;
    }
  }
  return r;
}

/// Two chamber points whose orbit hulls are incomparable under majorization.
inline std::pair<Vec, Vec> incomparable_generators(const FiniteGroup& g, reflekt::detail::Sampler& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const Vec a = random_chamber_point(g.root_system(), rng, 0.0);
    const Vec b = random_chamber_point(g.root_system(), rng, 0.0);
    if (!group_majorizes(g, a, b).holds && !group_majorizes(g, b, a).holds) return {a, b};
  }
  throw NumericalError("could not sample incomparable orbit hulls");
}

/// Orbit hull and hull union test sets for the proximal normal characterization.
inline std::vector<InvariantSetOracle> thm52_sets(const GroupPtr& g, reflekt::detail::Sampler& rng) {
  const auto [a, b] = incomparable_generators(*g, rng);
  return {orbit_hull_oracle(g, a), hull_union_oracle(g, {a, b})};
}

/// Proximal normal characterization at boundary points obtained by projecting
/// outside points; `trials` boundary points per set.
inline Report run_thm52(const GroupPtr& g, std::size_t trials, std::uint64_t seed) {
  Report r;
  r.check = "thm52";
  reflekt::detail::Sampler rng(seed);
  const auto n = static_cast<Eigen::Index>(g->dimension());
  for (const auto& set : thm52_sets(g, rng)) {
    std::vector<Vec> boundary;
    for (std::size_t t = 0; t < trials; ++t) {
      Vec z;
      std::optional<ProjectionSet> proj;
      do {
        z = rng.gaussian(n, 3.0);
        proj = project_invariant(set, z);
      } while (proj->distance < 1e-3);
      const Vec x = proj->points[rng.index(proj->points.size())];
      const Vec normal = z - x;
      boundary.push_back(x);
      Vec y;
      const double u = rng.uniform();
      if (u < 0.45) {
        y = rng.uniform(0.2, 2.0) * normal;
      } else if (u < 0.5) {
        y = Vec::Zero(n);
      } else if (u < 0.75) {
        y = random_element(*g, rng).apply(normal);
      } else {
        y = rng.gaussian(n);
      }
      try {
        r.true_cases += verify_proximal_characterization(set, x, y, 0.5) ? 1 : 0;
      } catch (const CharacterizationFailure& e) {
        r.counterexample = e.counterexample();
        return r;
      }
      ++r.trials;
    }
    if (!check_property_A(set, boundary, 200, seed)) {
      r.failure = set.label + " fails property A at sampled boundary points";
      return r;
    }
  }
  return r;
}

/// Proximal subdifferential characterization through the epigraph grid oracle
/// (n <= 3): |.|_inf when the group permits it and |.|^2, `trials` queries each.
inline Report run_thm54(const GroupPtr& g, std::size_t trials, std::uint64_t seed) {
  Report r;
  r.check = "thm54";
  if (g->dimension() > kEpigraphMaxDimension) throw DimensionCapError("thm54 verification needs n <= 3");
  std::vector<InvariantFunction> fs;
  if (is_signed_permutation_family(*g)) fs.push_back(functions::max_norm(g));
  fs.push_back(functions::squared_norm(g));
  reflekt::detail::Sampler rng(seed);
  for (const auto& f : fs) {
    const EpigraphContext epi(f);
    for (std::size_t t = 0; t < trials; ++t) {
      const Vec x_rep = random_chamber_point(g->root_system(), rng);
      const GroupElement& h = random_element(*g, rng);
      const Vec x = h.apply(x_rep);
      const bool singular = t % 10 == 9;
      Vec y;
      const double u = rng.uniform();
      if (!singular && u < 0.5) {
        y = h.apply(detail::random_subgradient(f, x_rep, rng));
      } else if (u < 0.6) {
        y = Vec::Zero(x.size());
      } else {
        y = rng.gaussian(x.size());
      }
      try {
        r.true_cases += verify_proximal_subdiff_characterization(epi, x, y, singular) ? 1 : 0;
      } catch (const CharacterizationFailure& e) {
        r.counterexample = e.counterexample();
        return r;
      }
      ++r.trials;
    }
  }
  return r;
}

/// The pseudo-convex |x|/(1+|x|) and the convex |x| must pass the sampled Schur
/// test; -|x|^2 must be caught.
inline Report run_schur(const GroupPtr& g, std::size_t trials, std::uint64_t seed) {
  Report r;
  r.check = "schur";
  for (const auto& f : {functions::saturating_norm(g), functions::euclidean_norm(g)}) {
    if (auto c = find_schur_violation(f, *g, trials, seed)) {
      r.counterexample = *c;
      return r;
    }
    r.trials += trials;
  }
  if (check_schur_convex(functions::negative_squared_norm(g), *g, trials, seed)) {
    r.failure = "negative-squared-norm was not detected as non Schur convex";
  }
  return r;
}

/// Property A: true for the ball, an orbit hull and a hull union; false for a
/// finite nontrivial orbit.
inline Report run_propA(const GroupPtr& g, std::size_t trials, std::uint64_t seed) {
  Report r;
  r.check = "propA";
  reflekt::detail::Sampler rng(seed);
  const auto n = static_cast<Eigen::Index>(g->dimension());
  const auto [a, b] = incomparable_generators(*g, rng);
  std::vector<InvariantSetOracle> convexish{ball_oracle(g, 1.0), orbit_hull_oracle(g, a), hull_union_oracle(g, {a, b})};
  for (const auto& set : convexish) {
    std::vector<Vec> boundary;
    for (std::size_t t = 0; t < trials; ++t) {
      const Vec z = rng.gaussian(n, 4.0);
      const auto p = project_invariant(set, z);
      boundary.push_back(p.points.front());
    }
    if (!check_property_A(set, boundary, 200, seed)) {
      r.failure = set.label + " rejected although it has property A";
      return r;
    }
    r.trials += trials;
  }
  const Vec generic = random_chamber_point(g->root_system(), rng, 0.0);
  const auto finite = finite_orbits_oracle(g, {generic});
  if (check_property_A(finite, {generic}, 200, seed)) {
    r.failure = "a finite nontrivial orbit was accepted as having property A";
  }
  return r;
}

}  // namespace reflekt::harness
