#include "conelab/monotone.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace conelab;
using conelab::testing::unit;

namespace {

constexpr double kPi = std::numbers::pi;

ConeSpec half_plane(int d) {
  ConeSpec s;
  s.n = d - 2;
  s.line = unit(d, 0);
  s.halfplanes.push_back({unit(d, 1), 1});
  s.case_tag = ConeCase::OpenBook;
  return s;
}

ConeSpec closed_book21() {
  ConeSpec s;
  s.n = 2;
  s.line = unit(4, 0);
  s.halfplanes = {{unit(4, 1), 2}, {Point(-unit(4, 1)), -1}};
  s.case_tag = ConeCase::ClosedBook;
  return s;
}

// ||T||(B_r)/(pi r^2) for {(z, z^2): Im z >= 0}: the ball meets the graph
// over |z| <= s with s^2 + s^4 = r^2, and the area element is 1 + 4|z|^2.
double half_graph_ratio(double r) {
  const double s2 = 0.5 * (std::sqrt(1.0 + 4.0 * r * r) - 1.0);
  return (0.5 * s2 + s2 * s2) / (r * r);
}

SheetMeshOptions fine() {
  SheetMeshOptions o;
  o.r_min = 2e-3;
  o.ratio = 1.04;
  o.segments = 160;
  return o;
}

}  // namespace

TEST(Density, ExactHalfPlaneConeIsOneHalfAtEveryRadius) {
  const Chain c = make_cone(half_plane(3), 0.05);
  for (double r : {0.1, 0.3, 0.6, 0.9}) EXPECT_NEAR(mass_ratio(c, {}, r), 0.5, 1e-12) << r;
  const auto est = density(c, {}, geometric_radii(0.8, 0.5, 5));
  EXPECT_NEAR(est.theta, 0.5, 1e-12);
}

TEST(Density, ClosedBookIsThreeHalves) {
  const Chain c = make_cone(closed_book21(), 0.05);
  EXPECT_NEAR(density(c, {}, geometric_radii(0.8, 0.5, 5)).theta, 1.5, 1e-9);
}

TEST(Density, HalfGraphMatchesClosedFormAndExtrapolates) {
  const Chain t = surface_chain(surfaces::holomorphic_half_graph(), fine());
  for (double r : {0.05, 0.1, 0.2, 0.4}) {
    const double exact = half_graph_ratio(r) - 0.5;
    EXPECT_NEAR(spherical_excess(t, {}, r, 0.5) / exact, 1.0, 5e-3) << r;
  }
  const auto est = density(t, {}, geometric_radii(0.4, 0.5, 6));
  EXPECT_NEAR(est.theta, 0.5, 1e-4);
  EXPECT_NEAR(est.gamma, 2.0, 0.2);
}

TEST(Excess, QuadraticLaw) {
  const Chain t = surface_chain(surfaces::holomorphic_half_graph(), fine());
  const double e1 = spherical_excess(t, {}, 0.1, 0.5);
  EXPECT_NEAR(e1, 0.005, 0.05 * 0.005);
  const double e2 = spherical_excess(t, {}, 0.2, 0.5);
  EXPECT_NEAR(e2 / e1, 4.0, 0.4);
}

TEST(Monotonicity, VanishesOnCones) {
  AlmostMinParams prm;
  for (const auto& spec : {half_plane(3), closed_book21()}) {
    const Chain c = make_cone(spec, 0.05);
    const auto rep = monotonicity_check(c, prm, 1.0, geometric_radii(0.8, 0.5, 6));
    EXPECT_LT(rep.max_abs_lhs, 1e-9);
    EXPECT_LT(rep.max_abs_rhs, 1e-9);
    EXPECT_LT(rep.max_cone_normal, 1e-12);
    EXPECT_EQ(rep.violations, 0);
  }
}

TEST(Monotonicity, HalfGraphSatisfiesInequality) {
  const Chain t = surface_chain(surfaces::holomorphic_half_graph(), fine());
  const auto rep = monotonicity_check(t, AlmostMinParams{}, 1.0, geometric_radii(0.4, 0.5, 6));
  EXPECT_EQ(rep.violations, 0);
  for (const auto& row : rep.rows) {
    EXPECT_GE(row.rhs, 0.0);
    EXPECT_GE(row.lhs - row.rhs, -1e-6);
  }
}

TEST(Monotonicity, RhsMatchesRefinedQuadrature) {
  // Same chain, deeper splitting of cut triangles: the integral is stable.
  const Chain t = surface_chain(surfaces::holomorphic_half_graph(), fine());
  const detail::MonotoneIntegrand f{0.0, 1.0};
  const Point o = Point::Zero(4);
  const double a = monotone_integral(t, o, 0.1, 0.2, f, 3);
  const double b = monotone_integral(t, o, 0.1, 0.2, f, 6);
  EXPECT_NEAR(a / b, 1.0, 1e-3);
}

TEST(Monotonicity, TentSaddleIsFlagged) {
  SheetMeshOptions o = fine();
  o.segments = 96;
  const Chain t = surface_chain(surfaces::tent_saddle(0.8, 0.2), o);
  const auto rep = monotonicity_check(t, AlmostMinParams{}, 1.0, geometric_radii(0.8, 0.7, 8));
  EXPECT_GT(rep.violations, 0);
}

TEST(Monotonicity, RejectsEmptyNeighbourhood) {
  const Chain c = make_cone(half_plane(3), 0.1);
  MonotonicityOptions opt;
  opt.p = 5.0 * unit(3, 2);
  EXPECT_THROW(monotonicity_check(c, AlmostMinParams{}, 1.0, {0.1, 0.2}, opt), MonotoneError);
}

TEST(ExcessBound, ConesAndSmallDistortions) {
  AlmostMinParams prm;
  const Chain c = make_cone(half_plane(3), 0.05);
  const auto radii = geometric_radii(0.8, 0.5, 5);
  EXPECT_TRUE(excess_lower_bound_check(c, prm, radii, 0.5).pass);
  prm.lambda = 0.1;
  for (const auto& row : excess_lower_bound_check(c, prm, radii, 0.5).rows) EXPECT_GE(row.slack, 0.0);

  // Push the cone forward by a map whose derivative deviates from the
  // identity by 0.05 |x|: the mass ratio moves by O(rho) at most.
  const Chain d = pushforward(c, [](const Point& x) -> Point {
    Point y = x;
    y[0] += 0.05 * x.norm() * x[1];
    y[1] -= 0.05 * x.norm() * x[0];
    return y;
  });
  prm.lambda = 0.05;
  const auto rep = excess_lower_bound_check(d, prm, radii, 0.5);
  EXPECT_TRUE(rep.pass);
  EXPECT_LE(rep.fitted_c, prm.c2);
}

TEST(AlmostMin, TentCompetitors) {
  const double r = 0.5, height = 0.2, rad = 0.25;
  SheetMeshOptions o;
  o.graded = false;
  o.h = 0.025;
  const Surface disc = surfaces::tent_disc(0.0, rad);
  const Surface tent = surfaces::tent_disc(height, rad);
  const Chain flat = surface_chain(disc, o, {}, 1e9);
  const Chain lifted = surface_chain(tent, o, {}, 1e9);
  AlmostMinParams prm;

  // Identity competitor: equality.
  const auto same = almost_min_check(flat, {make_competitor("none", disc, disc, o)}, prm, r);
  EXPECT_TRUE(same.pass);
  EXPECT_NEAR(same.worst_ratio, 1.0, 1e-14);

  // Flat disc against a tent: strict.
  const Competitor up = make_competitor("tent", disc, tent, o);
  EXPECT_NEAR(up.support_radius, rad, 1e-12);
  const auto strict = almost_min_check(flat, {up}, prm, r);
  EXPECT_TRUE(strict.pass);
  const double tent_area = kPi * r * r - kPi * rad * rad + kPi * rad * std::hypot(rad, height);
  EXPECT_NEAR(strict.rows[0].mass_competitor / tent_area, 1.0, 2e-3);
  EXPECT_LT(strict.worst_ratio, 1.0);

  // The tent is beaten by flattening unless Lambda absorbs the gap.
  const Competitor down = make_competitor("flatten", tent, disc, o);
  EXPECT_FALSE(almost_min_check(lifted, {down}, prm, r).pass);
  prm.lambda = 1.0;
  EXPECT_TRUE(almost_min_check(lifted, {down}, prm, r).pass);

  EXPECT_THROW(almost_min_check(flat, {up}, AlmostMinParams{}, 0.2), MonotoneError);
}
