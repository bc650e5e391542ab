#pragma once

// Polar triangulations of discs and half-discs in a 2D parameter plane.
// Sheets of cones, graphs and competitors are all images of these meshes.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace conelab {

struct ParamMesh {
  std::vector<Eigen::Vector2d> points;
  std::vector<std::array<int, 3>> triangles;  // counter-clockwise
  std::vector<double> radius;                 // polar radius per point
  std::vector<double> angle;                  // polar angle per point
  std::vector<int> rim;                       // outer ring in angular order
  std::vector<int> axis;                      // half-disc diameter, from -R to +R
  bool half = false;
};

namespace detail {

inline void orient_ccw(const std::vector<Eigen::Vector2d>& p, std::array<int, 3>& t) {
  const Eigen::Vector2d a = p[t[1]] - p[t[0]];
  const Eigen::Vector2d b = p[t[2]] - p[t[0]];
  if (a.x() * b.y() - a.y() * b.x() < 0.0) std::swap(t[1], t[2]);
}

// Triangulates the band between two rings given as index lists with
// nondecreasing angles (closed rings repeat their first entry at the end).
inline void zip_rings(const std::vector<int>& inner, const std::vector<double>& ain, const std::vector<int>& outer,
                      const std::vector<double>& aout, std::vector<std::array<int, 3>>& tris) {
  std::size_t i = 0, j = 0;
  while (i + 1 < inner.size() || j + 1 < outer.size()) {
    const bool advance_outer =
        (i + 1 >= inner.size()) || (j + 1 < outer.size() && aout[j + 1] - ain[i] <= ain[i + 1] - aout[j]);
    if (advance_outer) {
      tris.push_back({inner[i], outer[j], outer[j + 1]});
      ++j;
    } else {
      tris.push_back({inner[i], outer[j], inner[i + 1]});
      ++i;
    }
  }
}

}  // namespace detail

/// Polar mesh with a center vertex and rings at `radii` (ascending). Each
/// ring uses the given angle list: for half discs angles span [0, pi] with
/// both endpoints included; for full discs angles lie in [0, 2pi).
inline ParamMesh polar_mesh(const std::vector<double>& radii, const std::vector<std::vector<double>>& ring_angles,
                            bool half) {
  if (radii.empty() || radii.size() != ring_angles.size()) throw std::invalid_argument("polar_mesh: ring mismatch");
  ParamMesh m;
  m.half = half;
  auto add = [&](double r, double th) {
    m.points.emplace_back(r * std::cos(th), r * std::sin(th));
    if (half && (th == 0.0 || th == std::numbers::pi)) m.points.back().y() = 0.0;
    m.radius.push_back(r);
    m.angle.push_back(th);
    return static_cast<int>(m.points.size()) - 1;
  };
  const int center = add(0.0, 0.0);
  std::vector<int> prev{center};
  std::vector<double> prev_a{0.0};
  for (std::size_t j = 0; j < radii.size(); ++j) {
    const auto& angles = ring_angles[j];
    std::vector<int> ring;
    for (double th : angles) ring.push_back(add(radii[j], th));
    std::vector<int> cur = ring;
    std::vector<double> cur_a = angles;
    if (!half) {
      cur.push_back(ring.front());
      cur_a.push_back(angles.front() + 2.0 * std::numbers::pi);
    }
    if (j == 0) {
      for (std::size_t k = 0; k + 1 < cur.size(); ++k) m.triangles.push_back({center, cur[k], cur[k + 1]});
    } else {
      detail::zip_rings(prev, prev_a, cur, cur_a, m.triangles);
    }
    prev = std::move(cur);
    prev_a = std::move(cur_a);
    if (j + 1 == radii.size()) m.rim = ring;
  }
  for (auto& t : m.triangles) detail::orient_ccw(m.points, t);
  if (half) {
    // Diameter: theta = pi points from outside in, center, theta = 0 points.
    const std::size_t nr = radii.size();
    std::vector<int> neg, pos;
    int idx = 1;
    for (std::size_t j = 0; j < nr; ++j) {
      const int first = idx;
      const int last = idx + static_cast<int>(ring_angles[j].size()) - 1;
      pos.push_back(first);
      neg.push_back(last);
      idx = last + 1;
    }
    for (auto it = neg.rbegin(); it != neg.rend(); ++it) m.axis.push_back(*it);
    m.axis.push_back(center);
    for (int p : pos) m.axis.push_back(p);
  }
  return m;
}

inline std::vector<double> uniform_angles(int segments, bool half) {
  std::vector<double> a;
  if (half) {
    for (int i = 0; i <= segments; ++i) a.push_back(i == segments ? std::numbers::pi : std::numbers::pi * i / segments);
  } else {
    for (int i = 0; i < segments; ++i) a.push_back(2.0 * std::numbers::pi * i / segments);
  }
  return a;
}

/// Rings spaced by about h, angular spacing about h along each ring.
inline ParamMesh uniform_polar_mesh(double radius, double h, bool half) {
  const int rings = std::max(1, static_cast<int>(std::ceil(radius / h - 1e-9)));
  std::vector<double> radii;
  std::vector<std::vector<double>> angles;
  for (int j = 1; j <= rings; ++j) {
    const double r = radius * j / rings;
    radii.push_back(r);
    const double span = half ? std::numbers::pi : 2.0 * std::numbers::pi;
    const int seg = std::max(half ? 2 : 3, static_cast<int>(std::ceil(span * r / h - 1e-9)));
    angles.push_back(uniform_angles(seg, half));
  }
  return polar_mesh(radii, angles, half);
}

/// Scale-invariant mesh: geometric rings from r_min to radius with ratio q,
/// the same angular segment count on every ring, plus three uniform rings
/// inside r_min.
inline ParamMesh graded_polar_mesh(double radius, double r_min, double q, int segments, bool half) {
  std::vector<double> radii{r_min / 3.0, 2.0 * r_min / 3.0};
  for (double r = r_min; r < radius * (1.0 - 1e-12); r *= q) radii.push_back(r);
  radii.push_back(radius);
  std::vector<std::vector<double>> angles(radii.size(), uniform_angles(segments, half));
  return polar_mesh(radii, angles, half);
}

/// Uniform-ring mesh whose outer ring has exactly the given angles; inner
/// rings use `segments`-uniform angles.
inline ParamMesh polar_mesh_with_rim(const std::vector<double>& rim_angles, int rings, int segments, bool half) {
  std::vector<double> radii;
  std::vector<std::vector<double>> angles;
  for (int j = 1; j <= rings; ++j) {
    radii.push_back(j == rings ? 1.0 : static_cast<double>(j) / rings);
    angles.push_back(j == rings ? rim_angles : uniform_angles(segments, half));
  }
  return polar_mesh(radii, angles, half);
}

}  // namespace conelab
