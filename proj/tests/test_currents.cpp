#include "conelab/currents.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace conelab;
using conelab::testing::embed;
using conelab::testing::flat;
using conelab::testing::unit;
using conelab::testing::vec;

namespace {

SphericalChain great_circle(int dim, int a, int b, double max_angle = 0.2) {
  SphericalChain z;
  std::vector<Point> q{unit(dim, a), unit(dim, b), -unit(dim, a), -unit(dim, b)};
  for (int i = 0; i < 4; ++i)
    for (const auto& arc : subdivide_arc(make_arc(q[i], q[(i + 1) % 4]), max_angle)) z.add(arc);
  return z;
}

}  // namespace

TEST(Currents, BoundaryOfBoundaryIsZero) {
  std::mt19937 rng(5);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> coef(-3, 3);
  for (int trial = 0; trial < 10; ++trial) {
    ChainBuilder b(4, 3);
    for (int i = 0; i < 7; ++i) b.add_vertex(vec({g(rng), g(rng), g(rng), g(rng)}));
    for (int t = 0; t < 5; ++t) {
      std::vector<int> s{0, 1, 2, 3, 4, 5, 6};
      std::shuffle(s.begin(), s.end(), rng);
      s.resize(4);
      b.add(s, coef(rng));
    }
    const Chain c = b.build();
    EXPECT_TRUE(boundary(boundary(c)).empty());
  }
}

TEST(Currents, TripleDiscMass) {
  const Chain disc = embed(uniform_polar_mesh(1.0, 0.05, false), 4, flat(4), 3);
  EXPECT_NEAR(mass(disc), 3.0 * std::numbers::pi, 3.0 * 2e-3);
  // Boundary is the rim polygon with multiplicity 3.
  const Chain rim = boundary(disc);
  for (const auto& [id, c] : rim.coeffs()) EXPECT_EQ(std::llabs(c), 3);
  EXPECT_NEAR(mass(rim), 3.0 * 2.0 * std::numbers::pi, 3.0 * 1e-2);
}

TEST(Currents, LinearityAndNegation) {
  const Chain disc = embed(uniform_polar_mesh(1.0, 0.2, false), 3, flat(3));
  const Chain twice = disc + disc;
  EXPECT_EQ(twice, 2LL * disc);
  EXPECT_TRUE((disc - disc).empty());
  EXPECT_NEAR(mass(-disc), mass(disc), 1e-15);
  EXPECT_EQ(boundary(twice), 2LL * boundary(disc));
}

TEST(Currents, PushforwardKeepsIdsAndScalesMass) {
  const Chain disc = embed(uniform_polar_mesh(1.0, 0.2, false), 3, flat(3));
  const Chain scaled = pushforward(disc, [](const Point& p) { return Point(2.0 * p); });
  EXPECT_EQ(scaled.coeffs(), disc.coeffs());
  EXPECT_NEAR(mass(scaled), 4.0 * mass(disc), 1e-12);
  EXPECT_EQ(boundary(scaled).coeffs(), boundary(disc).coeffs());
}

TEST(Currents, TransferMatchesByPosition) {
  const Chain disc = embed(uniform_polar_mesh(1.0, 0.25, false), 3, flat(3));
  const Chain again = embed(uniform_polar_mesh(1.0, 0.25, false), 3, flat(3));
  const Chain moved = transfer(again, disc.complex_ptr());
  EXPECT_TRUE((moved - disc).empty());
}

TEST(Currents, HausdorffOfParallelSegments) {
  ChainBuilder b(3, 1);
  const int a0 = b.add_vertex(vec({0, 0, 0})), a1 = b.add_vertex(vec({1, 0, 0}));
  const int b0 = b.add_vertex(vec({0, 0.3, 0})), b1 = b.add_vertex(vec({1, 0.3, 0}));
  ChainBuilder c = b;
  b.add({a0, a1}, 1);
  c.add({b0, b1}, 1);
  EXPECT_NEAR(hausdorff_distance(b.build(), c.build(), 0.01), 0.3, 1e-9);
}

TEST(Currents, ConeOverGreatCircle) {
  const SphericalChain z = great_circle(4, 0, 1);
  EXPECT_NEAR(z.mass(), 2.0 * std::numbers::pi, 1e-12);
  EXPECT_TRUE(spherical_boundary(z).empty());
  const ConeOver cone = cone_over(z);
  EXPECT_NEAR(cone.exact_mass, std::numbers::pi, 1e-12);
  EXPECT_TRUE(boundary(cone.chain).coeffs().size() == z.arcs.size());
  // The fan inscribes a polygon, so its PL mass is a lower bound.
  EXPECT_LT(mass(cone.chain), cone.exact_mass);
  EXPECT_NEAR(mass(cone.chain), cone.exact_mass, 0.03);
}

TEST(Currents, ConeOverMultipleHalfCircles) {
  // Q half circles from P to N in distinct half-planes have boundary Q(N - P).
  const int q = 3;
  SphericalChain z;
  const Point p = unit(4, 0);
  for (int i = 0; i < q; ++i) {
    const double a = 0.7 * i;
    const Point w = std::cos(a) * unit(4, 1) + std::sin(a) * unit(4, 2);
    for (const auto& arc : subdivide_arc(make_arc(p, w), 0.2)) z.add(arc);
    for (const auto& arc : subdivide_arc(make_arc(w, -p), 0.2)) z.add(arc);
  }
  EXPECT_NEAR(cone_over(z).exact_mass, q * std::numbers::pi / 2.0, 1e-12);
  const auto bd = spherical_boundary(z);
  ASSERT_EQ(bd.size(), 2u);
  for (const auto& [pt, c] : bd) {
    if (pt.isApprox(p)) EXPECT_EQ(c, -q);
    else EXPECT_EQ(c, q);
  }
}

TEST(Currents, ConeRejectsAntipodalArc) {
  SphericalChain z;
  z.arcs.push_back({GeodesicArc{unit(3, 0), -unit(3, 0), std::numbers::pi}, 1, 1});
  EXPECT_THROW(cone_over(z), MeshError);
}

TEST(Currents, SphericalHausdorff) {
  const SphericalChain a = great_circle(3, 0, 1);
  const SphericalChain b = great_circle(3, 0, 1, 0.1);
  EXPECT_LT(hausdorff_distance(a, b), 0.01);
  const SphericalChain c = great_circle(3, 0, 2);
  EXPECT_NEAR(hausdorff_distance(a, c), std::sqrt(2.0), 0.02);
}

TEST(Currents, ChainFileRoundTrip) {
  const Chain disc = embed(uniform_polar_mesh(1.0, 0.3, false), 3, flat(3), -2);
  std::stringstream ss;
  write_chain(ss, disc, "disc.mesh");
  std::stringstream header(ss.str());
  EXPECT_EQ(chain_mesh_path(header), "disc.mesh");
  const Chain back = read_chain(ss, disc.complex_ptr());
  EXPECT_EQ(back, disc);
}

TEST(Currents, SphericalFileRoundTrip) {
  const SphericalChain z = great_circle(4, 1, 3);
  std::stringstream ss;
  write_spherical(ss, z);
  const SphericalChain back = read_spherical(ss);
  ASSERT_EQ(back.arcs.size(), z.arcs.size());
  EXPECT_NEAR(back.mass(), z.mass(), 1e-12);
}
