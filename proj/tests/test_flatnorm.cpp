#include "conelab/flatnorm.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace conelab;
using conelab::testing::embed;
using conelab::testing::flat;
using conelab::testing::unit;
using conelab::testing::vec;

namespace {

// A small triangulated planar patch lifted to R^3 by random heights, with a
// random integer 1-chain on it.
struct Instance {
  Chain t;
  Chain s;
};

Instance random_instance(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::uniform_int_distribution<int> pick(-2, 2);
  ParamMesh m = polar_mesh({0.5, 1.0}, {uniform_angles(3, false), uniform_angles(6, false)}, false);
  ChainBuilder b(3, 2);
  std::vector<int> ids;
  for (const auto& p : m.points) {
    Point q = Point::Zero(3);
    q[0] = p.x() + 0.1 * u(rng);
    q[1] = p.y() + 0.1 * u(rng);
    q[2] = u(rng);
    ids.push_back(b.add_vertex(q));
  }
  for (const auto& tri : m.triangles) b.add_support({ids[tri[0]], ids[tri[1]], ids[tri[2]]});
  const Chain support = b.build();
  Chain t(support.complex_ptr(), 1), s(support.complex_ptr(), 1);
  for (int id = 0; id < static_cast<int>(support.complex().num_simplices(1)); ++id) {
    if (rng() % 3 == 0) t.add(id, pick(rng));
    if (rng() % 4 == 0) s.add(id, pick(rng));
  }
  return {t, s};
}

Chain unit_triangle_boundary(double scale) {
  ChainBuilder b(3, 2);
  const int a = b.add_vertex(Point::Zero(3)), c = b.add_vertex(scale * unit(3, 0)), d = b.add_vertex(scale * unit(3, 1));
  b.add({a, c, d}, 1);
  return boundary(b.build());
}

}  // namespace

TEST(FlatNorm, IdenticalChainsHaveZeroDistance) {
  const Chain disc = embed(uniform_polar_mesh(1.0, 0.3, false), 3, flat(3));
  const auto cert = flat_distance(boundary(disc), boundary(disc), 2.0);
  EXPECT_EQ(cert.value, 0.0);
  EXPECT_TRUE(cert.integral);
}

TEST(FlatNorm, TriangleBoundaryTakesCheaperOption) {
  // For a small triangle the filling (area) wins; for a large one the
  // remainder (perimeter) wins.
  for (double scale : {0.5, 1.0, 3.0, 6.0}) {
    const Chain t = unit_triangle_boundary(scale);
    const Chain zero(t.complex_ptr(), 1);
    const double area = 0.5 * scale * scale;
    const double perimeter = scale * (2.0 + std::sqrt(2.0));
    const auto cert = flat_distance(t, zero, 100.0);
    EXPECT_NEAR(cert.value, std::min(area, perimeter), 1e-12) << "scale " << scale;
    EXPECT_TRUE(certificate_feasible(t, zero, cert));
  }
}

TEST(FlatNorm, BallClipping) {
  // Only the part of the triangle inside the ball is charged.
  const Chain t = unit_triangle_boundary(1.0);
  const Chain zero(t.complex_ptr(), 1);
  const double r = 0.5;
  const auto cert = flat_distance(t, zero, r);
  // Filling inside B_r is a quarter disc; the remainder option costs the two
  // radius-length legs.
  EXPECT_NEAR(cert.value, std::min(std::numbers::pi * r * r / 4.0, 2.0 * r), 1e-12);
}

TEST(FlatNorm, MatchesBruteForceOnSmallComplexes) {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    const Instance in = random_instance(rng);
    ASSERT_LE(in.t.complex().num_simplices(2), 12u);
    const auto cert = flat_distance(in.t, in.s, 1e6);
    ASSERT_TRUE(cert.integral) << cert.warnings.front();
    const double brute = flat_distance_bruteforce(in.t, in.s, 3);
    EXPECT_NEAR(cert.value, brute, 1e-9 * std::max(1.0, brute)) << "trial " << trial;
    EXPECT_TRUE(certificate_feasible(in.t, in.s, cert));
  }
}

TEST(FlatNorm, SymmetryAndTriangleInequality) {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const Instance in = random_instance(rng);
    const Chain zero(in.t.complex_ptr(), 1);
    const double ts = flat_distance(in.t, in.s, 1e6).value;
    const double st = flat_distance(in.s, in.t, 1e6).value;
    EXPECT_NEAR(ts, st, 1e-9);
    const double t0 = flat_distance(in.t, zero, 1e6).value;
    const double s0 = flat_distance(in.s, zero, 1e6).value;
    EXPECT_LE(ts, t0 + s0 + 1e-9);
    EXPECT_LE(ts, mass(in.t - in.s) + 1e-9);
  }
}

TEST(FlatNorm, ShrinkingLoopsConverge) {
  // Boundaries of triangles shrinking to the origin tend to zero in flat norm.
  double prev = std::numeric_limits<double>::infinity();
  for (double scale : {1.0, 0.5, 0.25, 0.125}) {
    const Chain t = unit_triangle_boundary(scale);
    const double v = flat_distance(t, Chain(t.complex_ptr(), 1), 1.0).value;
    EXPECT_LT(v, prev);
    prev = v;
  }
  EXPECT_NEAR(prev, 0.5 * 0.125 * 0.125, 1e-12);
}

TEST(FlatNorm, RejectsMismatchedComplexes) {
  const Chain a = unit_triangle_boundary(1.0), b = unit_triangle_boundary(1.0);
  EXPECT_THROW(flat_distance(a, b, 1.0), FlatNormError);
}

TEST(Lp, SmallProblem) {
  // min -x - y s.t. x + s1 = 2, y + s2 = 3.
  lp::Problem p;
  p.rows = 2;
  p.rhs = Eigen::Vector2d(2, 3);
  p.add_column({{{0, 1.0}}}, -1.0);
  p.add_column({{{1, 1.0}}}, -1.0);
  p.add_column({{{0, 1.0}}}, 0.0);
  p.add_column({{{1, 1.0}}}, 0.0);
  const auto r = lp::solve(p);
  ASSERT_EQ(r.status, lp::Status::Optimal);
  EXPECT_NEAR(r.objective, -5.0, 1e-12);
}

TEST(Lp, DetectsInfeasible) {
  lp::Problem p;
  p.rows = 1;
  p.rhs = Eigen::VectorXd::Constant(1, -1.0);
  p.add_column({{{0, 1.0}}}, 1.0);
  EXPECT_EQ(lp::solve(p).status, lp::Status::Infeasible);
}
