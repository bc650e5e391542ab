#pragma once

// Surfaces given as a union of parametrized sheets over a disc or half-disc,
// meshed on demand at any blow-up scale.

#include "conelab/cones.hpp"
#include "conelab/param_mesh.hpp"

#include <functional>
#include <string>

namespace conelab {

using SheetMap = std::function<Point(const Eigen::Vector2d&)>;

struct Sheet {
  SheetMap map;
  bool half = true;             // half-disc domain {y >= 0}; its x-axis is the boundary
  double domain_radius = 1.0;   // map is defined for |w| <= domain_radius
  long long mult = 1;
};

struct Surface {
  int ambient_dim = 3;
  std::vector<Sheet> sheets;
  std::string name;
};

/// How sheets are triangulated. Graded meshes keep a fixed relative
/// resolution down to r_min, which suits radius sweeps around the origin.
struct SheetMeshOptions {
  bool graded = true;
  double r_min = 1e-3;
  double ratio = 1.05;
  int segments = 128;  // per half turn
  double h = 0.05;     // used when !graded
};

/// Blow-up (x - p) / rho.
struct Blowup {
  Point p;  // empty means the origin
  double rho = 1.0;
};

inline ParamMesh sheet_param_mesh(bool half, double radius, const SheetMeshOptions& opt) {
  if (opt.graded) {
    const int seg = half ? opt.segments : 2 * opt.segments;
    return graded_polar_mesh(radius, std::min(opt.r_min, 0.5 * radius), opt.ratio, seg, half);
  }
  return uniform_polar_mesh(radius, opt.h, half);
}

/// Param radius used for a sheet at scale rho: the whole blown-up domain,
/// capped at `cover` (sheets are assumed to leave B_1 before |w| = cover).
inline double blowup_param_radius(const Sheet& s, double rho, double cover) {
  return std::min(cover, s.domain_radius / rho);
}

/// Image of one sheet at the given scale, as vertex positions over a mesh.
inline std::vector<Point> sheet_vertices(const Sheet& s, const ParamMesh& m, const Blowup& b, int dim) {
  const Point p = b.p.size() ? b.p : Point::Zero(dim);
  std::vector<Point> out;
  out.reserve(m.points.size());
  for (const auto& w : m.points) out.push_back((s.map(b.rho * w) - p) / b.rho);
  return out;
}

inline Chain surface_chain(const Surface& surf, const SheetMeshOptions& opt, const Blowup& b = {},
                           double cover = 2.0) {
  ChainBuilder cb(surf.ambient_dim, 2);
  for (const auto& s : surf.sheets) {
    const ParamMesh m = sheet_param_mesh(s.half, blowup_param_radius(s, b.rho, cover), opt);
    const auto pts = sheet_vertices(s, m, b, surf.ambient_dim);
    std::vector<int> ids;
    ids.reserve(pts.size());
    for (const auto& q : pts) ids.push_back(cb.add_vertex(q));
    for (const auto& t : m.triangles) cb.add({ids[t[0]], ids[t[1]], ids[t[2]]}, s.mult);
  }
  return cb.build();
}

/// Linear sheets of a cone. Half-planes map the x-axis onto l and the upper
/// half onto the v side; planes use their (a, b) frame.
inline Surface cone_surface(const ConeSpec& spec, double radius = 4.0) {
  Surface s;
  s.ambient_dim = spec.ambient_dim();
  s.name = "cone";
  for (const auto& hp : spec.halfplanes) {
    const Point l = spec.line, v = hp.v;
    s.sheets.push_back({[l, v](const Eigen::Vector2d& w) -> Point { return w.x() * l + w.y() * v; }, true, radius,
                        hp.mult});
  }
  for (const auto& pl : spec.interior_planes) {
    const Point a = pl.a, b = pl.b;
    s.sheets.push_back({[a, b](const Eigen::Vector2d& w) -> Point { return w.x() * a + w.y() * b; }, false, radius,
                        pl.mult});
  }
  return s;
}

namespace surfaces {

/// {(z, z^2) : Im z >= 0} in R^4 = C^2.
inline Surface holomorphic_half_graph(double domain = 1.0) {
  Surface s;
  s.ambient_dim = 4;
  s.name = "holomorphic_half_graph";
  s.sheets.push_back({[](const Eigen::Vector2d& w) -> Point {
                        Point p(4);
                        p << w.x(), w.y(), w.x() * w.x() - w.y() * w.y(), 2.0 * w.x() * w.y();
                        return p;
                      },
                      true, domain, 1});
  return s;
}

/// Each half-plane page of `spec` bent out of its plane by
/// amp * |w|^(1+alpha) * sin(theta) along a unit normal, so the boundary
/// stays on the line.
inline Surface bent_book(const ConeSpec& spec, double amp, double alpha, double domain = 1.0) {
  Surface s;
  s.ambient_dim = spec.ambient_dim();
  s.name = "bent_book";
  const int d = s.ambient_dim;
  for (std::size_t j = 0; j < spec.halfplanes.size(); ++j) {
    const Point l = spec.line, v = spec.halfplanes[j].v;
    // Normal: first coordinate direction orthogonal to l and v.
    Point nrm;
    for (int k = 0; k < d; ++k) {
      Point e = Point::Unit(d, (k + static_cast<int>(j) + 2) % d);
      e -= e.dot(l) * l + e.dot(v) * v;
      if (e.norm() > 0.5) {
        nrm = e.normalized();
        break;
      }
    }
    s.sheets.push_back({[l, v, nrm, amp, alpha](const Eigen::Vector2d& w) -> Point {
                          const double r = w.norm();
                          const double bump = r > 0.0 ? amp * std::pow(r, alpha) * w.y() : 0.0;
                          return w.x() * l + w.y() * v + bump * nrm;
                        },
                        true, domain, spec.halfplanes[j].mult});
  }
  return s;
}

/// Saddle cone x3 = a * tau(|x|) * cos(2 theta) whose tent profile tau is
/// linear up to r0 and falls back to zero at 2 r0. Not minimal: its density
/// ratio drops as the saddle flattens.
inline Surface tent_saddle(double amp, double r0, double domain = 1.0) {
  Surface s;
  s.ambient_dim = 3;
  s.name = "tent_saddle";
  s.sheets.push_back({[amp, r0](const Eigen::Vector2d& w) -> Point {
                        const double r = w.norm();
                        const double tau = r <= r0 ? r : std::max(0.0, 2.0 * r0 - r);
                        const double c2 = r > 0.0 ? (w.x() * w.x() - w.y() * w.y()) / (r * r) : 0.0;
                        Point p(3);
                        p << w.x(), w.y(), amp * tau * c2;
                        return p;
                      },
                      false, domain, 1});
  return s;
}

/// Flat disc with a conical tent of height `height` over |x| < radius.
inline Surface tent_disc(double height, double radius, double domain = 1.0) {
  Surface s;
  s.ambient_dim = 3;
  s.name = "tent_disc";
  s.sheets.push_back({[height, radius](const Eigen::Vector2d& w) -> Point {
                        Point p(3);
                        p << w.x(), w.y(), height * std::max(0.0, 1.0 - w.norm() / radius);
                        return p;
                      },
                      false, domain, 1});
  return s;
}

}  // namespace surfaces

}  // namespace conelab
