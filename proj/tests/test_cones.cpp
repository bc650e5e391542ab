#include "conelab/cone_net.hpp"
#include "conelab/cones.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace conelab;
using conelab::testing::unit;
using conelab::testing::vec;

namespace {

ConeSpec open_book(int n, const std::vector<int>& mults) {
  ConeSpec s;
  s.n = n;
  s.line = unit(n + 2, 0);
  for (std::size_t j = 0; j < mults.size(); ++j) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(mults.size()) + 0.3;
    s.halfplanes.push_back({std::cos(a) * unit(n + 2, 1) + std::sin(a) * unit(n + 2, 2), mults[j]});
  }
  s.case_tag = ConeCase::OpenBook;
  return s;
}

ConeSpec closed_book(int n, int qp, int qm) {
  ConeSpec s;
  s.n = n;
  s.line = unit(n + 2, 0);
  s.halfplanes = {{unit(n + 2, 1), qp}, {Point(-unit(n + 2, 1)), -qm}};
  s.case_tag = ConeCase::ClosedBook;
  return s;
}

ConeSpec single_plane(int n, int mult) {
  ConeSpec s;
  s.n = n;
  s.line = unit(n + 2, 0);
  const double t = 0.4;
  s.interior_planes.push_back({unit(n + 2, 1), std::cos(t) * unit(n + 2, 2) + std::sin(t) * unit(n + 2, 0), mult});
  s.case_tag = ConeCase::InteriorOnly;
  return s;
}

// Part of the boundary along l, as (coefficient along +l) per edge.
std::vector<long long> line_multiplicities(const Chain& c, const Point& l) {
  std::vector<long long> out;
  const auto& cx = c.complex();
  for (const auto& [id, coef] : boundary(c).coeffs()) {
    const auto s = cx.simplex(1, id);
    const Point a = cx.vertex(s[0]), b = cx.vertex(s[1]);
    if (a.norm() > 1.0 - 1e-9 && b.norm() > 1.0 - 1e-9) continue;
    out.push_back((b - a).dot(l) > 0 ? coef : -coef);
  }
  return out;
}

}  // namespace

TEST(Cones, DensityExamples) {
  EXPECT_EQ(density_at_origin(single_plane(1, 1)).twice, 2);
  EXPECT_EQ(density_at_origin(open_book(1, {2, 1})).twice, 3);
  ConeSpec mixed = closed_book(2, 3, 1);
  mixed.interior_planes.push_back({unit(4, 2), unit(4, 3), 1});
  mixed.case_tag = ConeCase::Mixed;
  EXPECT_EQ(density_at_origin(mixed).twice, 6);
}

TEST(Cones, HalfDiscMass) {
  const Chain c = make_cone(open_book(1, {1}), 0.02);
  EXPECT_NEAR(mass(c), std::numbers::pi / 2.0, 1e-3);
}

TEST(Cones, OpenBookThreePages) {
  const ConeSpec s = open_book(1, {1, 1, 1});
  const Chain c = make_cone(s, 0.02);
  EXPECT_NEAR(mass(c), 1.5 * std::numbers::pi, 2e-3);
  for (long long m : line_multiplicities(c, s.line)) EXPECT_EQ(m, 3);
  EXPECT_NEAR(cross_section(s, 0.1).mass(), 3.0 * std::numbers::pi, 1e-12);
}

TEST(Cones, ClosedBookBoundaryIsQ) {
  const ConeSpec s = closed_book(1, 2, 1);
  const Chain c = make_cone(s, 0.02);
  EXPECT_NEAR(mass(c), 1.5 * std::numbers::pi, 2e-3);
  const auto ms = line_multiplicities(c, s.line);
  ASSERT_FALSE(ms.empty());
  for (long long m : ms) EXPECT_EQ(m, 1);
}

TEST(Cones, CrossSectionOfPlaneAndSectorIdentity) {
  const ConeSpec s = single_plane(2, 2);
  const SphericalChain z = cross_section(s, 0.1);
  EXPECT_NEAR(z.mass(), 4.0 * std::numbers::pi, 1e-12);
  EXPECT_TRUE(spherical_boundary(z).empty());
  EXPECT_NEAR(z.mass(), 2.0 * cone_over(z).exact_mass, 1e-12);
  const SphericalChain half = cross_section(open_book(1, {1}), 0.1);
  EXPECT_NEAR(half.mass(), std::numbers::pi, 1e-12);
}

TEST(Cones, ValidationErrors) {
  ConeSpec bad = closed_book(1, 1, 1);
  EXPECT_THROW(validate(bad), ConeError);
  ConeSpec wrong_tag = open_book(1, {1});
  wrong_tag.case_tag = ConeCase::InteriorOnly;
  EXPECT_THROW(validate(wrong_tag), ConeError);
  ConeSpec two_planes_r3 = single_plane(1, 1);
  two_planes_r3.interior_planes.push_back({unit(3, 0), unit(3, 1), 1});
  EXPECT_THROW(validate(two_planes_r3), ConeError);
  ConeSpec through_line = single_plane(2, 1);
  through_line.interior_planes[0] = {unit(4, 0), unit(4, 1), 1};
  EXPECT_THROW(validate(through_line), ConeError);
}

TEST(Cones, MassMatchesDensityToSecondOrder) {
  for (const auto& s : {open_book(1, {1}), open_book(2, {2, 1}), closed_book(2, 3, 1), single_plane(2, 1)}) {
    const double theta = density_at_origin(s).value();
    const double e1 = std::abs(mass(make_cone(s, 0.1)) / std::numbers::pi - theta);
    const double e2 = std::abs(mass(make_cone(s, 0.05)) / std::numbers::pi - theta);
    EXPECT_LE(e2, 0.2 * theta * 0.05 * 0.05);
    EXPECT_GT(e1 / e2, 3.0);
  }
}

TEST(Cones, ClassifyRoundTrip) {
  ConeSpec mixed = closed_book(2, 3, 1);
  const double t = 0.7;
  mixed.interior_planes.push_back({unit(4, 2), std::cos(t) * unit(4, 3) + std::sin(t) * unit(4, 0), 2});
  mixed.case_tag = ConeCase::Mixed;
  for (const auto& s : {closed_book(1, 2, 1), open_book(1, {1, 1, 1}), open_book(2, {2, 1}), single_plane(1, 1), mixed}) {
    const Chain c = make_cone(s, 0.05);
    const ConeClassification r = classify(c);
    EXPECT_EQ(r.spec.case_tag, s.case_tag);
    EXPECT_TRUE(specs_match(r.spec, s, 1e-6)) << to_string(s.case_tag);
    EXPECT_NEAR(r.mass_interior + r.mass_boundary, r.mass_total, 1e-12);
  }
}

TEST(Cones, ClassifyTiltedPlaneHasNoBoundary) {
  const ConeSpec s = single_plane(1, 1);
  const ConeClassification r = classify(make_cone(s, 0.05));
  EXPECT_EQ(r.spec.case_tag, ConeCase::InteriorOnly);
  EXPECT_EQ(r.spec.boundary_multiplicity(), 0);
  EXPECT_EQ(r.spec.interior_planes.at(0).mult, 1);
}

TEST(Cones, ClassifyRejectsNonCones) {
  // A disc not centered at the origin is not a cone.
  ChainBuilder b(3, 2);
  const int a = b.add_vertex(vec({0, 0, 1})), c = b.add_vertex(vec({1, 0, 1})), d = b.add_vertex(vec({0, 1, 1}));
  b.add({a, c, d}, 1);
  EXPECT_THROW(classify(b.build()), ConeError);
}

TEST(Cones, SpecSerializationRoundTrip) {
  ConeSpec mixed = closed_book(2, 3, 1);
  mixed.interior_planes.push_back({unit(4, 2), unit(4, 3), 1});
  mixed.case_tag = ConeCase::Mixed;
  std::stringstream ss;
  write_spec(ss, mixed);
  const ConeSpec back = read_spec(ss);
  EXPECT_TRUE(specs_match(back, mixed, 0.0));
}

TEST(ConeSpace, ShapeEnumeration) {
  // Theta = 1/2 forces a single half-plane.
  const auto s111 = enumerate_shapes(1, 1, 1);
  ASSERT_EQ(s111.size(), 1u);
  EXPECT_EQ(s111[0].open_book, std::vector<int>{1});
  EXPECT_TRUE(s111[0].interior.empty());
  // Q = 0, Qbar = 2: one plane of multiplicity one.
  const auto s02 = enumerate_shapes(0, 2, 2);
  ASSERT_EQ(s02.size(), 1u);
  EXPECT_EQ(s02[0].interior, std::vector<int>{1});
  EXPECT_THROW(enumerate_shapes(3, 2, 1), ConeError);
  for (const auto& sh : enumerate_shapes(2, 6, 2)) {
    EXPECT_LE(sh.twice_density(), 6);
    EXPECT_GE(sh.twice_density(), 2);
  }
}

TEST(ConeSpace, SamplerIsValidAndDeterministic) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const ConeSpec a = sample_cone_space(2, 6, 2, seed);
    EXPECT_NO_THROW(validate(a));
    const HalfInteger th = density_at_origin(a);
    EXPECT_LE(th.twice, 6);
    EXPECT_GE(th.twice, 2);
    EXPECT_TRUE(specs_match(a, sample_cone_space(2, 6, 2, seed), 0.0));
  }
}

TEST(ConeSpace, HomotopyBoundForSmallRotation) {
  // Rotating a half-plane about l by a small angle sweeps a wedge of volume
  // theta * (integral of the distance to l over the unit half-disc) = 2 theta / 3.
  const Point l = unit(3, 0);
  double prev = 0.0;
  for (double ang : {0.01, 0.05, 0.2, 0.8}) {
    const Point v = std::cos(ang) * unit(3, 1) + std::sin(ang) * unit(3, 2);
    const double b = sheet_homotopy_bound(l, unit(3, 1), l, v, true, 1);
    if (ang < 0.1) EXPECT_NEAR(b / ang, 2.0 / 3.0, 0.01) << ang;
    EXPECT_GT(b, prev);
    prev = b;
  }
  EXPECT_EQ(sheet_homotopy_bound(l, unit(3, 1), l, unit(3, 1), true, 1), 0.0);
  // Multiplicity scales the bound.
  const Point v = std::cos(0.3) * unit(3, 1) + std::sin(0.3) * unit(3, 2);
  EXPECT_NEAR(sheet_homotopy_bound(l, unit(3, 1), l, v, true, 2), 2.0 * sheet_homotopy_bound(l, unit(3, 1), l, v, true, 1),
              1e-12);
}

TEST(ConeSpace, PrismLpAgreesWithHomotopyBound) {
  // The LP optimum on the swept complex can only improve on the (PL) sweep.
  const Point l = unit(3, 0);
  for (double ang : {0.3, 0.6}) {
    const Point v = std::cos(ang) * unit(3, 1) + std::sin(ang) * unit(3, 2);
    const double lp = sheet_prism_distance(l, unit(3, 1), l, v, true, 1, 0.25);
    const double bound = sheet_homotopy_bound(l, unit(3, 1), l, v, true, 1);
    EXPECT_LE(lp, bound * 1.05);
    EXPECT_GE(lp, 0.7 * bound);
  }
}

TEST(ConeSpace, NetOfHalfPlanes) {
  NetOptions opt;
  opt.pool = 60;
  const NetReport r = cone_space_net(1, 1, 1, 0.5, 20, 42, opt);
  EXPECT_GE(r.net.size(), 2u);
  EXPECT_EQ(r.covered, r.trials);
  const NetReport coarse = cone_space_net(1, 1, 1, 10.0, 5, 42, opt);
  EXPECT_EQ(coarse.net.size(), 1u);
  EXPECT_EQ(coarse.covered, 5);
}
