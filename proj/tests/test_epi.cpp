#include "conelab/epi.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace conelab;
using conelab::testing::unit;

namespace {

constexpr double kPi = std::numbers::pi;

// Second-order oracles for a half-plane sheet with Z on the unit sphere and
// normal field a sin(k theta): the cone over Z gains pi a^2 (k^2 - 1) / 8,
// the r^k graph gains pi a^2 (k - 1) / 4.
double cone_excess_oracle(int k, double a) { return kPi * a * a * (k * k - 1) / 8.0; }
double harmonic_excess_oracle(int k, double a) { return kPi * a * a * (k - 1) / 4.0; }

ConeSpec closed_book21() {
  ConeSpec s;
  s.n = 2;
  s.line = unit(4, 0);
  s.halfplanes = {{unit(4, 1), 2}, {Point(-unit(4, 1)), -1}};
  s.case_tag = ConeCase::ClosedBook;
  return s;
}

}  // namespace

TEST(Perturbation, ZeroAmplitudeReproducesTheCrossSection) {
  const auto p = make_perturbation(single_half_plane(), {{{0, 2, 0.0, false}}});
  EXPECT_TRUE(p.admissible);
  for (double e : p.eps) EXPECT_NEAR(e, 0.0, 1e-12);
  const auto rep = epiperimetric_gap(p);
  EXPECT_EQ(rep.status, "trivial");
  EXPECT_NEAR(rep.competitor_mass, rep.cone_mass, 1e-14);
  EXPECT_NEAR(rep.cone_mass_exact, kPi / 2.0, 1e-15);
}

TEST(Perturbation, StaysOnTheSphereWithPinnedEndpoints) {
  const auto p = make_perturbation(single_half_plane(), {{{0, 3, 0.01, false}, {1, 2, -0.004, false}}});
  for (const auto& a : p.z.arcs) {
    EXPECT_NEAR(a.arc.from.norm(), 1.0, 1e-12);
    EXPECT_NEAR(a.arc.to.norm(), 1.0, 1e-12);
  }
  EXPECT_EQ(p.eps[0], 0.0);
  EXPECT_NEAR(p.eps[3], 0.01, 2e-3);
  // Length excess of the spherical curve: (1/2) int (u'^2 - u^2) over [0, pi].
  EXPECT_NEAR(p.eps[2] / (kPi * (0.0001 * 8 + 0.000016 * 3) / 4.0), 1.0, 0.02);
  EXPECT_GT(p.eps[1], 0.0);
  EXPECT_LE(p.eps[1], 0.05);
}

TEST(Perturbation, HomotopyFlatBound) {
  // The strip between R and Z has width |a sin 2 theta| to first order.
  const double a = 0.01;
  const auto p = make_perturbation(single_half_plane(), {{{0, 2, a, false}}});
  EXPECT_NEAR(p.eps[1] / (2.0 * a), 1.0, 0.01);
  EpiOptions o;
  o.lp_flat = true;
  const auto q = make_perturbation(single_half_plane(), {{{0, 2, a, false}}}, o);
  EXPECT_LE(q.eps[1], p.eps[1]);
  EXPECT_GT(q.eps[1], 0.5 * p.eps[1]);
  EXPECT_EQ(paired_homotopy_area(p.r, p.r), 0.0);
}

TEST(Perturbation, RejectsBadInput) {
  EXPECT_THROW(make_perturbation(single_half_plane(), {{{0, 2, 0.01, true}}}), EpiError);
  EXPECT_THROW(make_perturbation(single_half_plane(), {{{2, 2, 0.01, false}}}), EpiError);
  EXPECT_THROW(make_perturbation(single_half_plane(), {{{0, 0, 0.01, false}}}), EpiError);
  EXPECT_THROW(make_perturbation(single_half_plane(), {{{0, 2, 0.3, false}}}), EpiError);
  const auto p = measure_perturbation(single_half_plane(), {{{0, 2, 0.3, false}}});
  EXPECT_FALSE(p.admissible);
  EXPECT_GE(p.violated, 1);  // flat distance or support distance, whichever trips first
}

TEST(Perturbation, SeededTablesAreDeterministic) {
  const ConeSpec s = sample_cone_space(2, 4, 2, 7);
  const auto a = random_modes(s, {2, 3}, 0.005, 11), b = random_modes(s, {2, 3}, 0.005, 11);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) EXPECT_EQ(a[i][j].a, b[i][j].a);
}

TEST(Gap, SecondOrderExcessOracles) {
  const double a = 0.01;
  for (int k : {2, 3, 4}) {
    const auto rep = single_mode_gap(k, a);
    ASSERT_EQ(rep.status, "ok");
    EXPECT_NEAR(rep.cone_excess / cone_excess_oracle(k, a), 1.0, 0.02) << k;
    EXPECT_NEAR(rep.competitor_excess / harmonic_excess_oracle(k, a), 1.0, 0.02) << k;
    EXPECT_NEAR(rep.delta, (k - 1.0) / (k + 1.0), 0.02) << k;
    // The exact sector mass of the cone over Z agrees with its triangulation
    // up to the shared chord deficit.
    EXPECT_NEAR((rep.cone_competitor_exact - rep.cone_mass_exact) / rep.cone_excess, 1.0, 0.05) << k;
  }
}

TEST(Gap, TiltIsTrivial) {
  const auto rep = single_mode_gap(1, 0.01);
  EXPECT_EQ(rep.status, "trivial");
  EXPECT_TRUE(rep.boundary.exact);
}

TEST(Gap, HalvingAmplitudeBarelyMovesDelta) {
  for (int k : {2, 3}) EXPECT_NEAR(single_mode_gap(k, 0.01).delta, single_mode_gap(k, 0.005).delta, 0.02);
}

TEST(Gap, BoundaryIsExactForMultiSheetCones) {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    const ConeSpec s = sample_cone_space(2, 4, 2, seed);
    const auto p = make_perturbation(s, random_modes(s, {2, 3}, 0.002, seed));
    const auto rep = epiperimetric_gap(p);
    EXPECT_TRUE(rep.boundary.exact) << rep.boundary.detail;
    EXPECT_EQ(rep.boundary.line_multiplicity, s.boundary_multiplicity());
  }
  const ConeSpec book = closed_book21();
  const auto rep = epiperimetric_gap(make_perturbation(book, {{{0, 2, 0.005, false}}, {{1, 3, 0.005, false}}}));
  EXPECT_TRUE(rep.boundary.exact) << rep.boundary.detail;
  EXPECT_EQ(rep.boundary.line_multiplicity, 1);
}

TEST(Gap, BoundaryCheckCatchesAWrongRim) {
  const auto p = make_perturbation(single_half_plane(), {{{0, 2, 0.01, false}}});
  const auto q = make_perturbation(single_half_plane(), {{{0, 2, 0.011, false}}});
  EXPECT_FALSE(check_competitor_boundary(harmonic_competitor(q), p.z, p.spec.line, 1).exact);
  EXPECT_FALSE(check_competitor_boundary(harmonic_competitor(p), p.z, p.spec.line, 2).exact);
}

TEST(Gap, CompetitorMassIsAdditiveOverSheets) {
  ConeSpec two = single_half_plane();
  two.halfplanes.push_back({Point(-unit(4, 1)), 1});
  two.case_tag = infer_case(two);
  const ModeTable t{{{0, 2, 0.01, false}}, {{1, 3, 0.008, false}}};
  const auto both = competitor_trio(make_perturbation(two, t));
  const auto a = competitor_trio(make_perturbation(single_half_plane(), {t[0]}));
  ConeSpec other = single_half_plane();
  other.halfplanes[0].v = -unit(4, 1);
  const auto b = competitor_trio(make_perturbation(other, {t[1]}));
  EXPECT_NEAR(mass(both.h), mass(a.h) + mass(b.h), 1e-12);
}

TEST(Fill, SmallCycleHasQuadraticMass) {
  // Small circle of angular radius rho around e3: length 2 pi sin(rho).
  const double rho = 0.01 / (2.0 * kPi);
  SphericalChain c;
  std::vector<Point> pts;
  for (int i = 0; i < 32; ++i) {
    const double t = 2.0 * kPi * i / 32;
    pts.push_back(Point(std::cos(rho) * unit(4, 2) + std::sin(rho) * (std::cos(t) * unit(4, 0) + std::sin(t) * unit(4, 1))));
  }
  for (int i = 0; i < 32; ++i) c.add(make_arc(pts[i], pts[(i + 1) % 32]));
  const auto f = isoperimetric_fill(c);
  EXPECT_NEAR(f.cycle_mass, 0.01, 1e-4);
  EXPECT_LE(f.mass, 1e-4);
  EXPECT_NEAR(f.mass, 1e-4 / (4.0 * kPi), 1e-6);
  EXPECT_TRUE(boundary(f.chain).coeffs().size() == 32);
  SphericalChain open;
  open.add(make_arc(unit(4, 0), unit(4, 1)));
  EXPECT_THROW(isoperimetric_fill(open), EpiError);
}

TEST(Sweep, OneOneTwoHasUniformGap) {
  SweepOptions o;
  o.epi.samples = 64;
  o.epi.rings = 16;
  const auto rep = epi_uniformity_sweep(1, 1, 2, 3, 3, o);
  ASSERT_EQ(rep.rows.size(), 9u);
  EXPECT_EQ(rep.counted, 9);
  EXPECT_GE(rep.min_delta, 0.15);
  EXPECT_TRUE(rep.all_boundaries_exact);
  const auto again = epi_uniformity_sweep(1, 1, 2, 3, 3, o);
  for (std::size_t i = 0; i < rep.rows.size(); ++i) EXPECT_EQ(rep.rows[i].delta, again.rows[i].delta);
}

TEST(Sweep, ZeroAmplitudeRowsAreTrivial) {
  SweepOptions o;
  o.amp = 0.0;
  o.epi.samples = 32;
  o.epi.rings = 8;
  const auto rep = epi_uniformity_sweep(1, 1, 2, 2, 2, o);
  for (const auto& row : rep.rows) EXPECT_EQ(row.status, "trivial");
  EXPECT_EQ(rep.counted, 0);
}
