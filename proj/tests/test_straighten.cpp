#include "conelab/straighten.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace conelab;
using conelab::testing::unit;

namespace {

CurveGraph circle_curve(double kappa, int half = 400) {
  // Bottom arc of the circle of radius 1/kappa tangent to the t axis at 0.
  const double r = 1.0 / kappa;
  return sample_curve(
      2, [r](double s) -> Point { return (r - std::sqrt(r * r - s * s)) * Point::Unit(2, 0); },
      [r](double s) -> Point { return s / std::sqrt(r * r - s * s) * Point::Unit(2, 0); }, 1.0, 2.0, half);
}

}  // namespace

TEST(Curve, HermiteInterpolationIsExactOnQuadratics) {
  const CurveGraph c = parabola_curve(0.3, 2, 20);
  for (double s : {-1.93, -0.41, 0.0, 0.07, 1.5})
    EXPECT_NEAR((c.value(s) - 0.3 * s * s * Point::Unit(2, 0)).norm(), 0.0, 1e-14);
  EXPECT_THROW(c.value(2.5), StraightenError);
}

TEST(Curve, FileRoundTripAndValidation) {
  const CurveGraph c = parabola_curve(0.01, 3, 50);
  std::stringstream ss;
  write_curve(ss, c);
  const CurveGraph back = read_curve(ss);
  ASSERT_EQ(back.n, 3);
  ASSERT_EQ(back.t.size(), c.t.size());
  for (std::size_t i = 0; i < c.t.size(); ++i) EXPECT_EQ(back.psi[i], c.psi[i]);
  std::stringstream bad("0 1 0\n1 1 0\n");
  EXPECT_THROW(read_curve(bad), StraightenError);
}

TEST(Holder, LineParabolaCircle) {
  EXPECT_EQ(holder_seminorm(parabola_curve(0.0), 1.0, 1.0), 0.0);
  // Tangent angle turns at the curvature; the parabola t^2 has curvature 2 at 0.
  const double p1 = holder_seminorm(parabola_curve(1.0, 2, 200), 1.0, 1.0);
  const double p2 = holder_seminorm(parabola_curve(1.0, 2, 400), 1.0, 1.0);
  EXPECT_NEAR(p1, 2.0, 0.05);
  EXPECT_NEAR(p1 / p2, 1.0, 0.01);
  EXPECT_NEAR(holder_seminorm(circle_curve(0.3), 1.0, 1.0), 0.3, 1e-3);
  EXPECT_THROW(holder_seminorm(parabola_curve(0.1), 1.0, -1.0), StraightenError);
}

TEST(Holder, NonincreasingUnderSubsampling) {
  const CurveGraph fine = circle_curve(0.4, 400);
  CurveGraph coarse = fine;
  coarse.t.clear(), coarse.psi.clear(), coarse.dpsi.clear();
  for (std::size_t i = 0; i < fine.t.size(); i += 4) {
    coarse.t.push_back(fine.t[i]);
    coarse.psi.push_back(fine.psi[i]);
    coarse.dpsi.push_back(fine.dpsi[i]);
  }
  EXPECT_LE(holder_seminorm(coarse, 0.5, 1.0), holder_seminorm(fine, 0.5, 1.0));
}

TEST(Straighten, IdentityForFlatCurve) {
  const auto phi = build_straightening(parabola_curve(0.0));
  for (const Point& x : {Point(unit(3, 0)), Point(0.3 * unit(3, 1) - 0.2 * unit(3, 2))}) EXPECT_EQ(phi(x), x);
  const auto rep = verify_straightening(phi);
  EXPECT_TRUE(rep.pass());
  EXPECT_LT(rep.c_iv, 1e-6);  // finite-difference noise only
  EXPECT_LT(rep.c_iii, 1e-6);
}

TEST(Straighten, SmallParabola) {
  const auto phi = build_straightening(parabola_curve(0.01));
  const auto rep = verify_straightening(phi);
  EXPECT_LE(rep.sphere_error, 1e-12);
  EXPECT_LE(rep.line_error, 1e-8);
  EXPECT_LE(rep.inverse_error, 1e-9);
  EXPECT_LT(rep.boundary_offset, 1e-12);
  EXPECT_TRUE(rep.pass()) << rep.c_iii << " " << rep.c_iv;
  for (const auto& row : rep.sandwich) EXPECT_NEAR(row.ratio, 1.0, rep.c1 * 0.02 * row.rho);
}

TEST(Straighten, ConstantsScaleLinearly) {
  const auto a = verify_straightening(build_straightening(parabola_curve(0.01)));
  const auto b = verify_straightening(build_straightening(parabola_curve(0.02)));
  EXPECT_NEAR(b.dphi_seminorm / a.dphi_seminorm, 2.0, 0.3);
  EXPECT_NEAR(b.iv_raw / a.iv_raw, 2.0, 0.3);
}

TEST(Straighten, RefinementStability) {
  const auto a = verify_straightening(build_straightening(parabola_curve(0.01, 2, 200)));
  const auto b = verify_straightening(build_straightening(parabola_curve(0.01, 2, 400)));
  EXPECT_NEAR(a.c_iv / b.c_iv, 1.0, 0.05);
}

TEST(Straighten, RejectsLargeSeminorm) {
  EXPECT_THROW(build_straightening(parabola_curve(0.5)), StraightenError);
  StraightenOptions loose;
  loose.epsilon1 = 10.0;
  loose.max_condition = 1.5;
  EXPECT_THROW(build_straightening(parabola_curve(0.5), loose), StraightenError);
}
