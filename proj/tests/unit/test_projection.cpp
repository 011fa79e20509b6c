#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

#include "oracles.hpp"
#include "reflekt/projection.hpp"

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

Vec gaussian(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Vec v(static_cast<Eigen::Index>(n));
  for (auto& c : v) c = nd(rng);
  return v;
}

}  // namespace

TEST(ProjectInvariant, BallAtOrigin) {
  for (auto g : {group(Family::B, 3), group(Family::I2, 5)}) {
    const auto p = project_invariant(ball_oracle(g, 1.0), Vec::Zero(static_cast<Eigen::Index>(g->dimension())));
    ASSERT_EQ(p.points.size(), 1u);
    EXPECT_LE(p.points.front().norm(), 0.0);
    EXPECT_EQ(p.distance, 0.0);
  }
}

TEST(ProjectInvariant, SphereRadialProjection) {
  const auto p = project_invariant(sphere_oracle(group(Family::B, 2), 1.0), vec({3, 4}));
  ASSERT_EQ(p.points.size(), 1u);
  EXPECT_LE(max_abs_diff(p.points.front(), vec({0.6, 0.8})), 1e-12);
  EXPECT_NEAR(p.distance, 4.0, 1e-12);
  EXPECT_THROW(project_invariant(sphere_oracle(group(Family::B, 2), 1.0), vec({0, 0})), OracleViolationError);
}

TEST(ProjectInvariant, FiniteOrbitExample) {
  const auto g = group(Family::B, 2);
  const auto set = finite_orbits_oracle(g, {vec({1, 0})});
  const auto p = project_invariant(set, vec({0.9, 0.1}));
  ASSERT_EQ(p.points.size(), 1u);
  EXPECT_LE(max_abs_diff(p.points.front(), vec({1, 0})), 1e-12);
  EXPECT_NEAR(p.distance, std::sqrt(0.02), 1e-12);

  const auto tie = project_invariant(set, vec({0.5, 0.5}));
  EXPECT_TRUE(oracle::same_set(tie.points, {vec({1, 0}), vec({0, 1})}, 1e-12));
  EXPECT_EQ(tie.stabilizer_order, 2u);
}

TEST(VerifyProjectionCharacterization, SpecExamples) {
  const auto g = group(Family::B, 2);
  const auto set = finite_orbits_oracle(g, {vec({1, 0})});
  EXPECT_TRUE(verify_projection_characterization(set, vec({0.9, 0.1}), vec({1, 0})));
  EXPECT_FALSE(verify_projection_characterization(set, vec({0.9, 0.1}), vec({0, -1})));
  const auto ball = ball_oracle(g, 2.0);
  EXPECT_TRUE(verify_projection_characterization(ball, vec({1.0, 0.5}), vec({1.0, 0.5})));
  EXPECT_THROW(verify_projection_characterization(set, vec({0.9, 0.1}), vec({0.5, 0.5})), PreconditionError);
}

class FiniteOrbitProjection : public ::testing::TestWithParam<std::pair<Family, int>> {};

TEST_P(FiniteOrbitProjection, MatchesBruteForceAndIsEquivariant) {
  const auto [f, p] = GetParam();
  const auto g = group(f, p);
  const auto n = g->dimension();
  std::mt19937_64 rng(41);
  const std::vector<Vec> gens{gaussian(rng, n), gaussian(rng, n, 2.0)};
  const auto set = finite_orbits_oracle(g, gens);
  std::vector<Vec> all;
  for (const auto& x : gens)
    for (const auto& e : g->elements()) all.push_back(e.matrix() * x);

  for (int t = 0; t < 100; ++t) {
    const Vec x = t % 4 == 0 ? Vec(g->elements()[static_cast<std::size_t>(t) % g->order()].matrix() * gens[0] * 0.5)
                             : gaussian(rng, n, 1.5);
    const auto proj = project_invariant(set, x);
    double d = 0;
    const auto brute = oracle::nearest(all, x, 1e-9, &d);
    EXPECT_NEAR(proj.distance, d, 1e-9);
    EXPECT_TRUE(oracle::same_set(proj.points, brute, 1e-9));
    for (const auto& e : g->elements()) {
      std::vector<Vec> moved;
      for (const auto& q : proj.points) moved.push_back(e.matrix() * q);
      EXPECT_TRUE(oracle::same_set(moved, project_invariant(set, e.apply(x)).points, 1e-9));
    }
    for (const auto& y : brute) EXPECT_TRUE(verify_projection_characterization(set, x, y));
  }
}

INSTANTIATE_TEST_SUITE_P(Families, FiniteOrbitProjection,
                         ::testing::Values(std::pair{Family::A, 3}, std::pair{Family::B, 2}, std::pair{Family::I2, 5},
                                           std::pair{Family::D, 3}));

TEST(ProjectInvariant, ConvexOraclesKeepChamberPointsInChamber) {
  std::mt19937_64 rng(43);
  for (auto g : {group(Family::B, 3), group(Family::A, 3), group(Family::I2, 6)}) {
    const auto& rs = g->root_system();
    const auto n = g->dimension();
    const std::vector<InvariantSetOracle> sets{ball_oracle(g, 1.0), orbit_hull_oracle(g, gaussian(rng, n))};
    for (const auto& set : sets) {
      for (int t = 0; t < 40; ++t) {
        const Vec x = canonical_representative(rs, gaussian(rng, n, 2.0)).representative;
        const auto p = project_invariant(set, x);
        ASSERT_EQ(p.points.size(), 1u);
        EXPECT_TRUE(in_chamber(rs, p.points.front()));
        // Unique projection: y̌ = P(x̌) and inner products agree.
        const Vec y = p.points.front();
        const Vec x_any = g->elements()[static_cast<std::size_t>(t) % g->order()].apply(x);
        const auto q = project_invariant(set, x_any);
        ASSERT_EQ(q.points.size(), 1u);
        EXPECT_LE(max_abs_diff(canonical_representative(rs, q.points.front()).representative, y), 1e-9);
        EXPECT_NEAR(x_any.dot(q.points.front()), x.dot(y), 1e-9);
      }
    }
  }
}

TEST(ProjectInvariant, BoxOracle) {
  const auto g = group(Family::B, 3);
  const auto p = project_invariant(box_oracle(g, 1.0), vec({2, -0.5, -3}));
  ASSERT_EQ(p.points.size(), 1u);
  EXPECT_LE(max_abs_diff(p.points.front(), vec({1, -0.5, -1})), 1e-12);
  EXPECT_THROW(box_oracle(group(Family::I2, 3), 1.0), PreconditionError);
}

TEST(OrbitHull, MatchesPlanarBruteForce) {
  std::mt19937_64 rng(47);
  for (int m : {3, 4, 5, 8}) {
    const auto g = group(Family::I2, m);
    const Vec gen = gaussian(rng, 2);
    const auto set = orbit_hull_oracle(g, gen);
    const auto verts = orbit(*g, gen);
    for (int t = 0; t < 100; ++t) {
      const Vec z = gaussian(rng, 2, 2.0);
      const Vec expected = oracle::planar_hull_projection(verts, z);
      const auto p = project_invariant(set, z);
      ASSERT_EQ(p.points.size(), 1u);
      EXPECT_LE((p.points.front() - expected).norm(), 1e-9);
      EXPECT_EQ(set.contains(z), (expected - z).norm() <= 1e-9);
    }
  }
}

TEST(HullUnion, MatchesBestOfBothHulls) {
  std::mt19937_64 rng(53);
  const auto g = group(Family::I2, 4);
  const Vec a = vec({2.0, 0.3});
  const Vec b = vec({1.2, 1.1});
  const auto set = hull_union_oracle(g, {a, b});
  const auto va = orbit(*g, a);
  const auto vb = orbit(*g, b);
  for (int t = 0; t < 200; ++t) {
    const Vec z = gaussian(rng, 2, 2.0);
    const Vec pa = oracle::planar_hull_projection(va, z);
    const Vec pb = oracle::planar_hull_projection(vb, z);
    const double d = std::min((pa - z).norm(), (pb - z).norm());
    const auto p = project_invariant(set, z);
    EXPECT_NEAR(p.distance, d, 1e-9);
    for (const auto& q : p.points) EXPECT_TRUE(set.contains(q));
  }
}

TEST(ProjectInvariant, DetectsNonInvariantOracle) {
  const auto g = group(Family::B, 2);
  InvariantSetOracle half;
  half.label = "half-plane";
  half.group = g;
  half.contains = [](const Vec& x) { return x[0] >= -1e-12; };
  half.chamber_project = [](const Vec& x) { return std::vector<Vec>{x}; };
  EXPECT_FALSE(check_oracle_invariance(half, {vec({1, 0})}));
  EXPECT_TRUE(check_oracle_invariance(ball_oracle(g, 1.0), {vec({1, 0}), vec({0.3, -2})}));
  EXPECT_THROW(project_invariant(half, vec({-1, 0.5})), OracleViolationError);
}

TEST(OrbitHull, BoundaryPointsAreMembers) {
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  for (int m : {3, 5, 6}) {
    const auto g = group(Family::I2, m);
    const auto verts = orbit(*g, gaussian(rng, 2));
    const auto set = orbit_hull_oracle(g, verts.front());
    for (std::size_t i = 0; i < verts.size(); ++i) {
      for (std::size_t j = i + 1; j < verts.size(); ++j) {
        const double l = ud(rng);
        const Vec p = l * verts[i] + (1 - l) * verts[j];
        EXPECT_TRUE(set.contains(p));
      }
    }
  }
}
