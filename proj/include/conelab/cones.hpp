#pragma once

// Two-dimensional cones with boundary Q[[l]]: a union of oriented planes
// through the origin (the interior part) plus half-planes hinged on l.

#include "conelab/currents.hpp"
#include "conelab/param_mesh.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

namespace conelab {

struct ConeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ConeCase { OpenBook, ClosedBook, InteriorOnly, Mixed };

inline const char* to_string(ConeCase c) {
  switch (c) {
    case ConeCase::OpenBook: return "open_book";
    case ConeCase::ClosedBook: return "closed_book";
    case ConeCase::InteriorOnly: return "interior_only";
    default: return "mixed";
  }
}

inline ConeCase parse_cone_case(const std::string& s) {
  if (s == "open_book") return ConeCase::OpenBook;
  if (s == "closed_book") return ConeCase::ClosedBook;
  if (s == "interior_only") return ConeCase::InteriorOnly;
  if (s == "mixed") return ConeCase::Mixed;
  throw ConeError("unknown case tag '" + s + "'");
}

/// Oriented plane spanned by the orthonormal pair (a, b).
struct InteriorPlane {
  Point a, b;
  int mult = 1;
};

/// Half-plane {s*l + t*v : t >= 0} oriented by (l, v), so that its boundary is
/// mult * [[l]] with l running from -l to +l.
struct HalfPlane {
  Point v;
  int mult = 1;
};

struct ConeSpec {
  int n = 1;
  Point line;  // unit vector along l
  std::vector<InteriorPlane> interior_planes;
  std::vector<HalfPlane> halfplanes;
  ConeCase case_tag = ConeCase::InteriorOnly;

  int ambient_dim() const { return n + 2; }
  int boundary_multiplicity() const {
    int q = 0;
    for (const auto& h : halfplanes) q += h.mult;
    return q;
  }
};

/// Exact density as a count of halves.
struct HalfInteger {
  long long twice = 0;
  double value() const { return 0.5 * static_cast<double>(twice); }
  friend bool operator==(HalfInteger, HalfInteger) = default;
};

inline std::ostream& operator<<(std::ostream& os, HalfInteger h) {
  if (h.twice % 2 == 0) return os << h.twice / 2;
  return os << h.twice << "/2";
}

namespace detail {

inline constexpr double kConeRankTol = 1e-9;

inline Eigen::MatrixXd columns(std::initializer_list<const Point*> cols) {
  Eigen::MatrixXd m(cols.begin()[0]->size(), static_cast<Eigen::Index>(cols.size()));
  int j = 0;
  for (const Point* c : cols) m.col(j++) = *c;
  return m;
}

inline double smallest_singular_value(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues().tail(1)[0];
}

// Both halves of a plane through l are the same plane; otherwise the
// half-plane {s l + t v} spans (l, v).
inline bool planes_transverse(const Point& a1, const Point& b1, const Point& a2, const Point& b2, double tol) {
  if (a1.size() < 4) return false;
  return smallest_singular_value(columns({&a1, &b1, &a2, &b2})) > tol;
}

inline bool is_unit(const Point& p) { return std::abs(p.norm() - 1.0) < 1e-9; }

}  // namespace detail

/// Case tag implied by the sheets of a spec.
inline ConeCase infer_case(const ConeSpec& s) {
  if (s.halfplanes.empty()) return ConeCase::InteriorOnly;
  if (!s.interior_planes.empty()) return ConeCase::Mixed;
  const bool any_negative = std::any_of(s.halfplanes.begin(), s.halfplanes.end(), [](const HalfPlane& h) { return h.mult < 0; });
  return any_negative ? ConeCase::ClosedBook : ConeCase::OpenBook;
}

/// Whether the boundary part is a closed book (two opposite halves with
/// multiplicities Q+ > Q- >= 1).
inline bool boundary_is_closed_book(const ConeSpec& s) {
  if (s.halfplanes.size() != 2) return false;
  const auto& p = s.halfplanes[0].mult > 0 ? s.halfplanes[0] : s.halfplanes[1];
  const auto& m = s.halfplanes[0].mult > 0 ? s.halfplanes[1] : s.halfplanes[0];
  return p.mult > 0 && m.mult < 0 && p.mult > -m.mult && (p.v + m.v).norm() < 1e-9;
}

/// Throws ConeError describing the first violated invariant.
inline void validate(const ConeSpec& s) {
  const int d = s.ambient_dim();
  if (s.n < 1) throw ConeError("codimension n must be >= 1");
  if (s.line.size() != d || !detail::is_unit(s.line)) throw ConeError("line must be a unit vector in R^(n+2)");
  for (const auto& p : s.interior_planes) {
    if (p.a.size() != d || p.b.size() != d) throw ConeError("plane basis has wrong dimension");
    if (!detail::is_unit(p.a) || !detail::is_unit(p.b) || std::abs(p.a.dot(p.b)) > 1e-9)
      throw ConeError("plane basis must be orthonormal");
    if (p.mult < 1) throw ConeError("interior plane multiplicity must be >= 1");
    const Point proj = p.a * p.a.dot(s.line) + p.b * p.b.dot(s.line);
    if ((s.line - proj).norm() < 1e-6) throw ConeError("interior plane contains the line l");
  }
  for (std::size_t i = 0; i < s.interior_planes.size(); ++i)
    for (std::size_t j = i + 1; j < s.interior_planes.size(); ++j) {
      const auto &p = s.interior_planes[i], &q = s.interior_planes[j];
      if (!detail::planes_transverse(p.a, p.b, q.a, q.b, detail::kConeRankTol))
        throw ConeError("interior planes must meet only at the origin");
    }
  for (const auto& h : s.halfplanes) {
    if (h.v.size() != d || !detail::is_unit(h.v) || std::abs(h.v.dot(s.line)) > 1e-9)
      throw ConeError("half-plane direction must be a unit vector orthogonal to l");
    if (h.mult == 0) throw ConeError("half-plane multiplicity must be nonzero");
    for (const auto& p : s.interior_planes)
      if (!detail::planes_transverse(p.a, p.b, s.line, h.v, detail::kConeRankTol))
        throw ConeError("interior plane meets a half-plane away from the origin");
  }
  for (std::size_t i = 0; i < s.halfplanes.size(); ++i)
    for (std::size_t j = i + 1; j < s.halfplanes.size(); ++j)
      if ((s.halfplanes[i].v - s.halfplanes[j].v).norm() < 1e-9) throw ConeError("half-planes must be distinct");

  const bool any_negative = std::any_of(s.halfplanes.begin(), s.halfplanes.end(), [](const HalfPlane& h) { return h.mult < 0; });
  if (any_negative && !boundary_is_closed_book(s))
    throw ConeError("negative half-plane multiplicity is only allowed in a closed book with Q+ > Q- >= 1");
  if (s.halfplanes.empty() && s.interior_planes.empty()) throw ConeError("empty cone");
  if (s.case_tag != infer_case(s)) throw ConeError(std::string("case tag does not match the sheets (expected ") + to_string(infer_case(s)) + ")");
}

inline HalfInteger density_at_origin(const ConeSpec& s) {
  HalfInteger h;
  for (const auto& p : s.interior_planes) h.twice += 2LL * p.mult;
  for (const auto& q : s.halfplanes) h.twice += std::abs(q.mult);
  if (h.twice < s.boundary_multiplicity()) throw ConeError("density below Q/2");
  return h;
}

/// Triangulated cone restricted to B_1. Half-planes share the vertices on l
/// and all sheets share the origin.
inline Chain make_cone(const ConeSpec& spec, double h) {
  validate(spec);
  if (!(h > 0.0) || h > 0.5) throw ConeError("mesh size must be in (0, 0.5]");
  const int d = spec.ambient_dim();
  ChainBuilder b(d, 2);
  auto add_sheet = [&](const ParamMesh& m, const Point& e1, const Point& e2, long long coef) {
    std::vector<int> ids;
    ids.reserve(m.points.size());
    for (const auto& q : m.points) ids.push_back(b.add_vertex(q.x() * e1 + q.y() * e2));
    for (const auto& t : m.triangles) b.add({ids[t[0]], ids[t[1]], ids[t[2]]}, coef);
  };
  if (!spec.halfplanes.empty()) {
    const ParamMesh half = uniform_polar_mesh(1.0, h, true);
    for (const auto& hp : spec.halfplanes) add_sheet(half, spec.line, hp.v, hp.mult);
  }
  if (!spec.interior_planes.empty()) {
    const ParamMesh disc = uniform_polar_mesh(1.0, h, false);
    for (const auto& p : spec.interior_planes) add_sheet(disc, p.a, p.b, p.mult);
  }
  return b.build();
}

/// Great circles for interior planes and half circles P -> N (P = l, N = -l)
/// for half-planes, with multiplicities copied.
inline SphericalChain cross_section(const ConeSpec& spec, double max_angle) {
  validate(spec);
  SphericalChain z;
  auto add_path = [&](const std::vector<Point>& pts, long long coef) {
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
      for (const auto& a : subdivide_arc(make_arc(pts[i], pts[i + 1]), max_angle))
        z.add(a, std::llabs(coef), coef > 0 ? 1 : -1);
  };
  for (const auto& p : spec.interior_planes) add_path({p.a, p.b, -p.a, -p.b, p.a}, p.mult);
  for (const auto& hp : spec.halfplanes) add_path({spec.line, hp.v, -spec.line}, hp.mult);
  return z;
}

inline double cone_exact_mass(const ConeSpec& spec) { return std::numbers::pi * density_at_origin(spec).value(); }

// ---------------------------------------------------------------------------
// Serialization: "key = value" lines, with [plane] and [halfplane] blocks.

inline void write_spec(std::ostream& os, const ConeSpec& s) {
  auto vec = [&](const Point& p) {
    for (int i = 0; i < p.size(); ++i) os << (i ? " " : "") << p[i];
  };
  os << std::setprecision(17);
  os << "n = " << s.n << "\ncase = " << to_string(s.case_tag) << "\nline = ";
  vec(s.line);
  os << '\n';
  for (const auto& p : s.interior_planes) {
    os << "\n[plane]\na = ";
    vec(p.a);
    os << "\nb = ";
    vec(p.b);
    os << "\nmult = " << p.mult << '\n';
  }
  for (const auto& h : s.halfplanes) {
    os << "\n[halfplane]\nv = ";
    vec(h.v);
    os << "\nmult = " << h.mult << '\n';
  }
}

inline ConeSpec read_spec(std::istream& is) {
  ConeSpec s;
  enum class Block { Header, Plane, Half } block = Block::Header;
  std::string case_str;
  std::string line;
  int lineno = 0;
  auto parse_vec = [&](const std::string& v) {
    std::istringstream ss(v);
    std::vector<double> xs;
    double x;
    while (ss >> x) xs.push_back(x);
    if (!ss.eof()) throw ConeError("line " + std::to_string(lineno) + ": bad number");
    return Point(Eigen::Map<Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size())));
  };
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    line = line.substr(first, line.find_last_not_of(" \t\r") - first + 1);
    if (line == "[plane]") {
      block = Block::Plane;
      s.interior_planes.emplace_back();
      continue;
    }
    if (line == "[halfplane]") {
      block = Block::Half;
      s.halfplanes.emplace_back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConeError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = line.substr(0, eq), val = line.substr(eq + 1);
    key.erase(key.find_last_not_of(" \t") + 1);
    val.erase(0, val.find_first_not_of(" \t"));
    if (block == Block::Header) {
      if (key == "n") s.n = std::stoi(val);
      else if (key == "case") case_str = val;
      else if (key == "line") s.line = parse_vec(val);
      else throw ConeError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    } else if (block == Block::Plane) {
      auto& p = s.interior_planes.back();
      if (key == "a") p.a = parse_vec(val);
      else if (key == "b") p.b = parse_vec(val);
      else if (key == "mult") p.mult = std::stoi(val);
      else throw ConeError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    } else {
      auto& h = s.halfplanes.back();
      if (key == "v") h.v = parse_vec(val);
      else if (key == "mult") h.mult = std::stoi(val);
      else throw ConeError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  if (s.line.size() == 0) {
    // A purely interior cone does not need a line; pick any direction off the planes.
    s.line = Point::Zero(s.n + 2);
    s.line[s.n + 1] = 1.0;
  }
  s.case_tag = case_str.empty() ? infer_case(s) : parse_cone_case(case_str);
  validate(s);
  return s;
}

// ---------------------------------------------------------------------------
// Classification of triangulated cones.

struct ConeClassification {
  ConeSpec spec;
  Chain interior;  // S^int
  Chain bounded;   // S^b
  double mass_total = 0.0;
  double mass_interior = 0.0;
  double mass_boundary = 0.0;
  std::vector<double> density_ratios;  // mass(B_r) / (pi r^2) for r = 1, 1/2, 1/4
};

struct ClassifyOptions {
  double plane_tol = 1e-6;     // triangles must lie in planes through 0
  double merge_angle = 1e-4;   // principal-angle threshold for one sheet
  double density_tol = 1e-2;   // relative spread allowed in density ratios
};

namespace detail {

struct Sheet {
  Eigen::MatrixXd proj;
  Eigen::MatrixXd basis;  // d x 2
  std::vector<int> tris;
};

inline Eigen::MatrixXd orthonormal_span(const Point& x, const Point& y) {
  Eigen::MatrixXd e(x.size(), 2);
  e.col(0) = x.normalized();
  Point w = y - e.col(0).dot(y) * e.col(0);
  e.col(1) = w.normalized();
  return e;
}

inline double det2(const Eigen::MatrixXd& frame, const Point& x, const Point& y) {
  const Eigen::Vector2d a = frame.transpose() * x, b = frame.transpose() * y;
  return a.x() * b.y() - a.y() * b.x();
}

inline Eigen::MatrixXd pca_plane(const std::vector<Point>& pts) {
  Eigen::MatrixXd m(pts.front().size(), static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = pts[i];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(2);
}

}  // namespace detail

/// Density ratios mass(T, B_r) / (pi r^2) for the given radii.
inline std::vector<double> density_ratios(const Chain& c, const std::vector<double>& radii) {
  std::vector<double> out;
  const Point o = Point::Zero(c.complex().ambient_dim());
  for (double r : radii) out.push_back(mass(c, Ball{o, r}) / (std::numbers::pi * r * r));
  return out;
}

inline ConeClassification classify(const Chain& chain, const ClassifyOptions& opt = {}) {
  if (chain.dim() != 2) throw ConeError("classify expects a 2-chain");
  if (chain.empty()) throw ConeError("not a cone: empty chain");
  const auto& cx = chain.complex();
  const int d = cx.ambient_dim();
  if (d < 3) throw ConeError("ambient dimension must be at least 3");

  // Sheets: triangles grouped by the 2-plane through the origin containing them.
  std::vector<detail::Sheet> sheets;
  const double merge = std::sin(opt.merge_angle);
  for (const auto& [id, coef] : chain.coeffs()) {
    const auto p = cx.points(2, id);
    const Eigen::MatrixXd e = detail::orthonormal_span(p[1] - p[0], p[2] - p[0]);
    const double scale = std::max({1.0, p[0].norm(), p[1].norm(), p[2].norm()});
    for (const auto& v : p)
      if ((v - e * (e.transpose() * v)).norm() > opt.plane_tol * scale)
        throw ConeError("not a cone: a triangle does not lie in a plane through the origin");
    const Eigen::MatrixXd proj = e * e.transpose();
    auto it = std::find_if(sheets.begin(), sheets.end(),
                           [&](const detail::Sheet& s) { return (s.proj - proj).norm() < merge; });
    if (it == sheets.end()) {
      sheets.push_back({proj, e, {}});
      it = sheets.end() - 1;
    }
    it->tris.push_back(id);
  }

  ConeClassification out;
  out.density_ratios = density_ratios(chain, {1.0, 0.5, 0.25});
  const double theta = out.density_ratios[0];
  for (double dr : out.density_ratios)
    if (std::abs(dr - theta) > opt.density_tol * std::max(theta, 1.0))
      throw ConeError("not a cone: density ratio varies with the radius");

  // The line l carries the part of the boundary off the unit sphere.
  const Chain bd = boundary(chain);
  std::vector<std::pair<int, long long>> line_edges;
  for (const auto& [id, coef] : bd.coeffs()) {
    const auto s = cx.simplex(1, id);
    if (cx.vertex(s[0]).norm() < 1.0 - 1e-6 || cx.vertex(s[1]).norm() < 1.0 - 1e-6) line_edges.emplace_back(id, coef);
  }
  ConeSpec& spec = out.spec;
  spec.n = d - 2;
  int q = 0;
  if (!line_edges.empty()) {
    std::vector<Point> pts;
    for (const auto& [id, coef] : line_edges)
      for (int v : cx.simplex(1, id)) pts.push_back(cx.vertex(v));
    Eigen::MatrixXd m(d, static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = pts[i];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
    Point u = svd.matrixU().col(0);
    for (const auto& x : pts)
      if ((x - u * u.dot(x)).norm() > opt.plane_tol * std::max(1.0, x.norm()))
        throw ConeError("unclassifiable: boundary off the sphere is not a line through the origin");
    std::optional<long long> common;
    for (const auto& [id, coef] : line_edges) {
      const auto s = cx.simplex(1, id);
      const long long along = (cx.vertex(s[1]) - cx.vertex(s[0])).dot(u) > 0 ? coef : -coef;
      if (common && *common != along) throw ConeError("unclassifiable: multiplicity along l is not constant");
      common = along;
    }
    if (*common < 0) {
      u = -u;
      common = -*common;
    }
    spec.line = u;
    q = static_cast<int>(*common);
  } else {
    spec.line = Point::Zero(d);
    spec.line[d - 1] = 1.0;
  }

  out.interior = Chain(chain.complex_ptr(), 2);
  out.bounded = Chain(chain.complex_ptr(), 2);
  auto constant_mult = [&](const std::vector<std::pair<int, long long>>& signed_coefs) {
    const long long m0 = signed_coefs.front().second;
    for (const auto& [id, c] : signed_coefs)
      if (c != m0) throw ConeError("unclassifiable: multiplicity is not constant on a sheet");
    return static_cast<int>(m0);
  };
  for (auto& sh : sheets) {
    std::vector<Point> pts;
    for (int id : sh.tris)
      for (const auto& p : cx.points(2, id)) pts.push_back(p);
    sh.basis = detail::pca_plane(pts);
    const bool has_line = q != 0 && (spec.line - sh.basis * (sh.basis.transpose() * spec.line)).norm() < 1e-6;
    if (has_line) {
      Point v = sh.basis.col(0) - spec.line * spec.line.dot(sh.basis.col(0));
      if (v.norm() < 0.5) v = sh.basis.col(1) - spec.line * spec.line.dot(sh.basis.col(1));
      v.normalize();
      std::vector<std::pair<int, long long>> side[2];
      for (int id : sh.tris) {
        const auto p = cx.points(2, id);
        const double h = ((p[0] + p[1] + p[2]) / 3.0).dot(v);
        const int s = h > 0 ? 0 : 1;
        Eigen::MatrixXd frame(d, 2);
        frame.col(0) = spec.line;
        frame.col(1) = s == 0 ? v : Point(-v);
        const double orient = detail::det2(frame, p[1] - p[0], p[2] - p[0]);
        side[s].emplace_back(id, orient > 0 ? chain.coeff(id) : -chain.coeff(id));
      }
      for (int s = 0; s < 2; ++s) {
        if (side[s].empty()) continue;
        const int m = constant_mult(side[s]);
        spec.halfplanes.push_back({s == 0 ? v : Point(-v), m});
        for (const auto& [id, c] : side[s]) out.bounded.add(id, chain.coeff(id));
      }
    } else {
      Eigen::MatrixXd frame = sh.basis;
      std::vector<std::pair<int, long long>> coefs;
      for (int id : sh.tris) {
        const auto p = cx.points(2, id);
        const double orient = detail::det2(frame, p[1] - p[0], p[2] - p[0]);
        coefs.emplace_back(id, orient > 0 ? chain.coeff(id) : -chain.coeff(id));
      }
      int m = constant_mult(coefs);
      if (m < 0) {
        frame.col(1) = -frame.col(1);
        m = -m;
      }
      spec.interior_planes.push_back({frame.col(0), frame.col(1), m});
      for (int id : sh.tris) out.interior.add(id, chain.coeff(id));
    }
  }
  if (spec.boundary_multiplicity() != q) throw ConeError("unclassifiable: half-plane multiplicities do not add up to Q");
  spec.case_tag = infer_case(spec);
  try {
    validate(spec);
  } catch (const ConeError& e) {
    throw ConeError(std::string("unclassifiable: ") + e.what());
  }
  out.mass_total = mass(chain);
  out.mass_interior = mass(out.interior);
  out.mass_boundary = mass(out.bounded);
  return out;
}

// ---------------------------------------------------------------------------
// Comparison of specs up to reordering of sheets.

namespace detail {

inline double plane_distance(const InteriorPlane& p, const InteriorPlane& q) {
  // Oriented planes as unit simple 2-vectors a ^ b.
  const Eigen::MatrixXd wp = p.a * p.b.transpose() - p.b * p.a.transpose();
  const Eigen::MatrixXd wq = q.a * q.b.transpose() - q.b * q.a.transpose();
  return (wp - wq).norm() / std::sqrt(2.0);
}

template <class T, class Cost>
bool match_sheets(const std::vector<T>& a, const std::vector<T>& b, Cost cost, double tol) {
  if (a.size() != b.size()) return false;
  std::vector<int> perm(b.size());
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool ok = true;
    for (std::size_t i = 0; i < a.size() && ok; ++i) ok = a[i].mult == b[perm[i]].mult && cost(a[i], b[perm[i]]) <= tol;
    if (ok) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

}  // namespace detail

/// True when both specs describe the same cone: equal case tags and
/// multiplicities, sheets equal up to `tol`.
inline bool specs_match(const ConeSpec& a, const ConeSpec& b, double tol = 1e-6) {
  if (a.case_tag != b.case_tag || a.n != b.n) return false;
  if (!a.halfplanes.empty() && (a.line - b.line).norm() > tol) return false;
  if (!detail::match_sheets(a.interior_planes, b.interior_planes, detail::plane_distance, tol)) return false;
  return detail::match_sheets(a.halfplanes, b.halfplanes,
                              [](const HalfPlane& x, const HalfPlane& y) { return (x.v - y.v).norm(); }, tol);
}

}  // namespace conelab
