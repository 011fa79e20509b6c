#include <gtest/gtest.h>

#include <memory>
#include <random>

#include "oracles.hpp"
#include "reflekt/harness.hpp"
#include "reflekt/variational.hpp"

using namespace reflekt;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

std::shared_ptr<const FiniteGroup> group(Family f, int p) {
  return std::make_shared<const FiniteGroup>(enumerate_group(standard_root_system(f, p)));
}

}  // namespace

TEST(CheckSubgradient, SpecExamples) {
  const auto f = functions::max_norm(group(Family::B, 2));
  EXPECT_TRUE(check_subgradient(f, vec({3, 1}), vec({1, 0})));
  EXPECT_TRUE(check_subgradient(f, vec({1, 1}), vec({0.5, 0.5})));
  EXPECT_FALSE(check_subgradient(f, vec({3, 1}), vec({0, 1})));
  // The refuting probe from the example.
  EXPECT_LT(f(vec({3, 2})), f(vec({3, 1})) + vec({0, 1}).dot(vec({0, 1})));
  EXPECT_THROW(check_subgradient(f, vec({3, 1}), vec({1, 0}), 0), PreconditionError);
}

TEST(LewisCharacterization, SpecExamples) {
  const auto a = group(Family::A, 3);
  EXPECT_TRUE(verify_lewis_characterization(functions::sum_largest(a, 2), vec({1, 3, 2}), vec({0, 1, 1})));
  EXPECT_TRUE(oracle::in_subdifferential("sum-largest-2", vec({3, 2, 1}), vec({1, 1, 0})));

  const auto b = group(Family::B, 2);
  EXPECT_TRUE(verify_lewis_characterization(functions::max_norm(b), vec({-3, 1}), vec({-1, 0})));
  EXPECT_FALSE(verify_lewis_characterization(functions::max_norm(b), vec({3, 1}), vec({0, 0})));
  EXPECT_TRUE(verify_lewis_characterization(functions::max_norm(b), vec({3, 1}), vec({1, 0})));
}

TEST(ClosedFormSubgradients, AreExactMembers) {
  std::mt19937_64 rng(101);
  for (auto [f, p] : {std::pair{Family::A, 3}, std::pair{Family::B, 3}, std::pair{Family::D, 3}, std::pair{Family::A, 4}}) {
    const auto g = group(f, p);
    detail::Sampler s(rng());
    for (const auto& fn : harness::convex_test_functions(g)) {
      for (int t = 0; t < 60; ++t) {
        const Vec x = g->elements()[s.index(g->order())].apply(harness::random_chamber_point(g->root_system(), s));
        for (const auto& y : fn.subgradients(x)) {
          EXPECT_TRUE(oracle::in_subdifferential(fn.label, x, y)) << fn.label << " x=" << x.transpose();
          EXPECT_TRUE(check_subgradient(fn, x, y, 32, static_cast<std::uint64_t>(t)));
        }
      }
    }
  }
}

// Both sides of the equivalence decided by the exact dual-set oracle, plus the
// sampled harness, on the query distribution used by the acceptance run.
class LewisProperty : public ::testing::TestWithParam<std::pair<Family, int>> {};

TEST_P(LewisProperty, ExactOracleAgreesOnBothSides) {
  const auto [fam, p] = GetParam();
  const auto g = group(fam, p);
  const auto& rs = g->root_system();
  detail::Sampler rng(103);
  for (const auto& f : harness::convex_test_functions(g)) {
    int positives = 0;
    for (int t = 0; t < 150; ++t) {
      const auto [x, y] = harness::detail::subgradient_query(f, rng);
      const Vec xr = canonical_representative(rs, x).representative;
      const Vec yr = canonical_representative(rs, y).representative;
      const bool lhs = oracle::in_subdifferential(f.label, x, y);
      const bool rhs = oracle::in_subdifferential(f.label, xr, yr) && std::abs(xr.dot(yr) - x.dot(y)) <= 1e-8;
      EXPECT_EQ(lhs, rhs) << f.label << " x=" << x.transpose() << " y=" << y.transpose();
      const bool sampled = verify_lewis_characterization(f, x, y, 32, static_cast<std::uint64_t>(t));
      if (lhs) {
        EXPECT_TRUE(sampled);
      }
      positives += lhs;
    }
    EXPECT_GT(positives, 30) << f.label;
  }
}

INSTANTIATE_TEST_SUITE_P(Groups, LewisProperty,
                         ::testing::Values(std::pair{Family::A, 3}, std::pair{Family::B, 2}, std::pair{Family::B, 3},
                                           std::pair{Family::D, 4}, std::pair{Family::I2, 5}));

TEST(SubgradientChainRule, ImagesOfSubgradientsAreSubgradients) {
  const auto g = group(Family::B, 3);
  detail::Sampler rng(107);
  for (const auto& f : harness::convex_test_functions(g)) {
    for (int t = 0; t < 10; ++t) {
      const Vec x = harness::random_chamber_point(g->root_system(), rng);
      const Vec y = harness::detail::random_subgradient(f, x, rng);
      for (const auto& h : g->elements()) EXPECT_TRUE(check_subgradient(f, h.apply(x), h.apply(y), 16));
    }
  }
}

TEST(SubgradientsInChamber, NonnegativeOnRootsOutsideStabilizer) {
  for (auto [fam, p] : {std::pair{Family::A, 4}, std::pair{Family::B, 3}, std::pair{Family::D, 4}, std::pair{Family::I2, 6}}) {
    const auto g = group(fam, p);
    const auto& rs = g->root_system();
    detail::Sampler rng(109);
    for (const auto& f : harness::convex_test_functions(g)) {
      for (int t = 0; t < 80; ++t) {
        const Vec x = harness::random_chamber_point(rs, rng, 0.4);
        const auto v = stabilizer(*g, x).root_subset;
        for (const auto& y : f.subgradients(x)) {
          for (std::size_t i = 0; i < rs.positive_roots().size(); ++i) {
            if (std::find(v.begin(), v.end(), i) != v.end()) continue;
            EXPECT_GE(y.dot(rs.positive_roots()[i]), -1e-9) << f.label;
          }
        }
      }
    }
  }
}

TEST(ProximalNormal, UnitDisc) {
  const auto disc = ball_oracle(group(Family::B, 2), 1.0);
  EXPECT_TRUE(proximal_normal_member({vec({1, 0}), vec({1, 0}), 1.0, disc}));
  EXPECT_FALSE(proximal_normal_member({vec({1, 0}), vec({0, 1}), 0.1, disc}));
  EXPECT_TRUE(proximal_normal_member({vec({1, 0}), vec({0, 0}), 0.1, disc}));
  EXPECT_THROW(proximal_normal_member({vec({1, 0}), vec({1, 0}), 0.0, disc}), PreconditionError);
  EXPECT_THROW(proximal_normal_member({vec({2, 0}), vec({1, 0}), 1.0, disc}), PreconditionError);
}

TEST(ProximalNormal, OrbitHullVertex) {
  const auto g = group(Family::I2, 4);
  const auto hull = orbit_hull_oracle(g, vec({2, 1}));
  for (const auto& v : orbit(*g, vec({2, 1}))) {
    EXPECT_TRUE(verify_proximal_characterization(hull, v, v, 0.5));
    EXPECT_TRUE(verify_proximal_characterization(hull, v, Vec::Zero(2), 0.5));
    // A direction pointing into the hull is never normal.
    EXPECT_FALSE(verify_proximal_characterization(hull, v, -v, 0.1));
  }
}

TEST(ProximalNormal, HullUnionBoundaryOfSmallerHull) {
  const auto g = group(Family::I2, 4);
  const auto set = hull_union_oracle(g, {vec({2, 0.3}), vec({1.3, 1.2})});
  // (1.3, 1.2) sticks out of the octagon co O((2, 0.3)), whose edge there is x + y = 2.3.
  EXPECT_FALSE(orbit_hull_oracle(g, vec({2, 0.3})).contains(vec({1.3, 1.2})));
  for (const auto& h : g->elements()) {
    const Vec x = h.apply(vec({1.3, 1.2}));
    const Vec y = h.apply(vec({1, 0.5}));
    EXPECT_TRUE(verify_proximal_characterization(set, x, y, 0.5));
    EXPECT_FALSE(verify_proximal_characterization(set, x, h.apply(vec({0, -1})), 0.1));
  }
}

TEST(PropertyA, SpecExamples) {
  const auto g = group(Family::I2, 4);
  const std::vector<Vec> on_disc{vec({1, 0}), vec({0.6, -0.8})};
  EXPECT_TRUE(check_property_A(ball_oracle(g, 1.0), on_disc));
  EXPECT_TRUE(check_property_A(orbit_hull_oracle(g, vec({2, 1})), orbit(*g, vec({2, 1}))));

  const auto set = hull_union_oracle(g, {vec({2, 0.3}), vec({1.3, 1.2})});
  std::vector<Vec> boundary = orbit(*g, vec({2, 0.3}));
  for (const auto& v : orbit(*g, vec({1.3, 1.2}))) boundary.push_back(v);
  EXPECT_TRUE(check_property_A(set, boundary));

  const auto finite = finite_orbits_oracle(g, {vec({2, 1})});
  EXPECT_FALSE(check_property_A(finite, {vec({2, 1})}));
}

TEST(PropertyA, ConvexOraclesPassFiniteOrbitsFail) {
  detail::Sampler rng(113);
  for (auto [fam, p] : {std::pair{Family::A, 3}, std::pair{Family::B, 3}, std::pair{Family::I2, 7}}) {
    const auto g = group(fam, p);
    const auto n = static_cast<Eigen::Index>(g->dimension());
    for (int t = 0; t < 5; ++t) {
      const Vec gen = rng.gaussian(n);
      const auto hull = orbit_hull_oracle(g, gen);
      const auto pts = orbit(*g, gen);
      EXPECT_TRUE(check_property_A(hull, pts, 50, static_cast<std::uint64_t>(t)));
      EXPECT_TRUE(check_property_A(ball_oracle(g, 2.0), {Vec(2.0 * gen.normalized())}, 50));
      if (pts.size() > 1) {
        EXPECT_FALSE(check_property_A(finite_orbits_oracle(g, {gen}), {gen}, 50));
      }
    }
  }
}

TEST(ProximalSubgradient, SpecExamples) {
  const auto b = group(Family::B, 2);
  EXPECT_TRUE(proximal_subgradient_member(functions::squared_norm(b), vec({1, 0}), vec({2, 0})));
  EXPECT_FALSE(proximal_subgradient_member(functions::squared_norm(b), vec({1, 0}), vec({1, 0})));
  const EpigraphContext concave(functions::negative_l1_norm(b));
  for (const Vec& y : {vec({0, 0}), vec({1, 0}), vec({0.3, -0.2}), vec({-1, -1})}) {
    EXPECT_FALSE(proximal_subgradient_member(concave, Vec::Zero(2), y)) << y.transpose();
  }
  const EpigraphContext max(functions::max_norm(b));
  EXPECT_TRUE(proximal_subgradient_member(max, vec({1, 1}), vec({0.5, 0.5})));
  EXPECT_FALSE(proximal_subgradient_member(max, vec({1, 1}), vec({1, 1})));
  EXPECT_THROW(EpigraphContext(functions::max_norm(group(Family::B, 4))), DimensionCapError);
}

TEST(ProximalSubdiffCharacterization, SpecExamples) {
  const auto b = group(Family::B, 2);
  const EpigraphContext quad(functions::squared_norm(b));
  EXPECT_TRUE(verify_proximal_subdiff_characterization(quad, vec({1, -2}), vec({2, -4})));
  EXPECT_FALSE(verify_proximal_subdiff_characterization(quad, vec({1, -2}), vec({2, 4})));

  const EpigraphContext max(functions::max_norm(b));
  EXPECT_TRUE(verify_proximal_subdiff_characterization(max, vec({-1, 1}), vec({-0.5, 0.5})));
  EXPECT_FALSE(verify_proximal_subdiff_characterization(max, vec({-1, 1}), vec({1, 0})));
  EXPECT_TRUE(verify_proximal_subdiff_characterization(max, vec({-1, 1}), vec({0, 0}), true));
  EXPECT_FALSE(verify_proximal_subdiff_characterization(max, vec({-1, 1}), vec({-1, 0}), true));

  const EpigraphContext product(functions::coordinate_product(group(Family::A, 2)));
  EXPECT_THROW(verify_proximal_subdiff_characterization(product, vec({1, 2}), vec({2, 1})), PreconditionError);
}

TEST(Epigraph, ExtendedActionAndInvariance) {
  const auto g = group(Family::B, 2);
  const EpigraphContext epi(functions::l1_norm(g));
  EXPECT_EQ(epi.extended_group().order(), g->order());
  EXPECT_EQ(epi.extended_group().dimension(), 3u);
  for (const auto& h : g->elements()) {
    const GroupElement e = extend(h);
    const EpigraphPoint p{vec({0.3, -1.2}), 0.7};
    EXPECT_LE(max_abs_diff(e.apply(p.as_vector()), p.transformed(h).as_vector()), 1e-15);
    EXPECT_NEAR(inner(p.transformed(h), p.transformed(h)), inner(p, p), 1e-14);
  }
  detail::Sampler rng(127);
  std::vector<Vec> samples;
  for (int t = 0; t < 100; ++t) {
    const Vec x = rng.gaussian(2);
    samples.push_back(EpigraphPoint{x, epi.function()(x) + rng.uniform(-1.0, 1.0)}.as_vector());
  }
  EXPECT_TRUE(check_oracle_invariance(epi.oracle(), samples));
}

TEST(Epigraph, GridProjectionMatchesClosedForm) {
  // Epigraph of |x|^2 in R^2 x R: projection of (x, t) below the graph solves a
  // scalar equation along the ray through x.
  const EpigraphContext epi(functions::squared_norm(group(Family::B, 2)));
  detail::Sampler rng(131);
  for (int t = 0; t < 20; ++t) {
    const Vec x = rng.gaussian(2, 0.6);
    const double h = x.squaredNorm() - rng.uniform(0.05, 0.2);
    Vec z(3);
    z << x, h;
    // Minimize (r - |x|)^2 + (r^2 - h)^2 over r >= 0 by bisection on the derivative.
    double lo = 0.0, hi = x.norm() + 1.0;
    for (int k = 0; k < 200; ++k) {
      const double r = 0.5 * (lo + hi);
      (2 * (r - x.norm()) + 4 * r * (r * r - h) > 0 ? hi : lo) = r;
    }
    const double r = 0.5 * (lo + hi);
    const double exact = std::hypot(r - x.norm(), r * r - h);
    const auto proj = project_invariant(epi.oracle(), z);
    EXPECT_NEAR(proj.distance, exact, 2e-4);
  }
}

TEST(SchurConvexity, SpecExamples) {
  for (auto g : {group(Family::A, 3), group(Family::B, 2), group(Family::I2, 5)}) {
    EXPECT_TRUE(check_schur_convex(functions::saturating_norm(g), *g, 100, 1));
    EXPECT_TRUE(check_schur_convex(functions::euclidean_norm(g), *g, 100, 2));
    EXPECT_FALSE(check_schur_convex(functions::negative_squared_norm(g), *g, 100, 3));
  }
  const auto g = group(Family::B, 2);
  EXPECT_TRUE(check_schur_convex(functions::max_norm(g), *g, 100));
  EXPECT_THROW(check_schur_convex(functions::max_norm(g), *g, 0), PreconditionError);
  const auto cx = find_schur_violation(functions::negative_squared_norm(g), *g, 50);
  ASSERT_TRUE(cx.has_value());
  EXPECT_TRUE(group_majorizes(*g, cx->x, cx->y).holds);
}

TEST(FunctionInvariance, ShippedFunctions) {
  detail::Sampler rng(137);
  const auto g = group(Family::B, 3);
  std::vector<Vec> samples;
  for (int t = 0; t < 30; ++t) samples.push_back(rng.gaussian(3, 2.0));
  for (const auto& f : {functions::max_norm(g), functions::l1_norm(g), functions::distance_to_ball(g, 1.0),
                        functions::euclidean_norm(g), functions::squared_norm(g), functions::saturating_norm(g),
                        functions::negative_l1_norm(g)}) {
    EXPECT_TRUE(check_function_invariance(f, samples)) << f.label;
  }
  // The permutation-only functions are not sign-flip invariant.
  EXPECT_FALSE(check_function_invariance(functions::coordinate_product(g), samples));
  EXPECT_TRUE(check_function_invariance(functions::sum_largest(group(Family::A, 3), 2), samples));
}

TEST(Harness, ShortRunsPass) {
  EXPECT_TRUE(harness::run_thm31(group(Family::B, 2), 40, 1).passed());
  EXPECT_TRUE(harness::run_thm52(group(Family::I2, 4), 10, 2).passed());
  EXPECT_TRUE(harness::run_thm54(group(Family::B, 2), 6, 3).passed());
  EXPECT_TRUE(harness::run_schur(group(Family::A, 3), 30, 4).passed());
  EXPECT_TRUE(harness::run_propA(group(Family::A, 3), 5, 5).passed());
}
