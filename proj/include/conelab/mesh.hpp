#pragma once

// Simplicial complexes embedded in R^d, simplex measures, ball clipping and
// geodesic arcs on the unit sphere.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace conelab {

using Point = Eigen::VectorXd;

struct MeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kDegeneracyFloor = 1e-12;
inline constexpr int kMaxSimplexDim = 3;

// Vertex tuple of a simplex in ascending index order; unused slots are -1.
using SimplexKey = std::array<int, 4>;

struct SimplexKeyHash {
  std::size_t operator()(const SimplexKey& k) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (int v : k) {
      h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(v));
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

// Signed incidence entry: simplex id and orientation sign.
struct Incidence {
  int id;
  int sign;
};

namespace detail {

// Sign of the permutation sorting `v` ascending; 0 if an index repeats.
inline int sort_with_sign(std::span<int> v) {
  int sign = 1;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j + 1 < v.size() - i; ++j) {
      if (v[j] == v[j + 1]) return 0;
      if (v[j] > v[j + 1]) {
        std::swap(v[j], v[j + 1]);
        sign = -sign;
      }
    }
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    if (v[i] == v[i + 1]) return 0;
  return sign;
}

inline SimplexKey make_key(std::span<const int> sorted) {
  SimplexKey key{-1, -1, -1, -1};
  std::copy(sorted.begin(), sorted.end(), key.begin());
  return key;
}

inline double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// k-volume of the simplex spanned by the given points (Gram determinant).
inline double gram_volume(const std::vector<Point>& pts) {
  const int k = static_cast<int>(pts.size()) - 1;
  if (k <= 0) return 1.0;
  Eigen::MatrixXd edges(pts[0].size(), k);
  for (int i = 0; i < k; ++i) edges.col(i) = pts[i + 1] - pts[0];
  const double det = (edges.transpose() * edges).determinant();
  return std::sqrt(std::max(det, 0.0)) / factorial(k);
}

// Signed area of {|x| <= r} ∩ triangle(0, a, b) in the plane.
inline double disc_wedge_area(Eigen::Vector2d a, Eigen::Vector2d b, double r) {
  auto cross = [](const Eigen::Vector2d& p, const Eigen::Vector2d& q) { return p.x() * q.y() - p.y() * q.x(); };
  const Eigen::Vector2d d = b - a;
  const double A = d.squaredNorm();
  if (A == 0.0) return 0.0;
  const double B = a.dot(d);
  const double C = a.squaredNorm() - r * r;
  std::array<double, 4> ts{0.0, 0.0, 0.0, 1.0};
  int nt = 1;
  const double disc = B * B - A * C;
  if (disc > 0.0) {
    const double s = std::sqrt(disc);
    const double t1 = (-B - s) / A;
    const double t2 = (-B + s) / A;
    if (t1 > 0.0 && t1 < 1.0) ts[nt++] = t1;
    if (t2 > 0.0 && t2 < 1.0) ts[nt++] = t2;
  }
  ts[nt++] = 1.0;
  double area = 0.0;
  for (int i = 0; i + 1 < nt; ++i) {
    const Eigen::Vector2d p = a + ts[i] * d;
    const Eigen::Vector2d q = a + ts[i + 1] * d;
    const Eigen::Vector2d mid = a + 0.5 * (ts[i] + ts[i + 1]) * d;
    if (mid.squaredNorm() <= r * r) {
      area += 0.5 * cross(p, q);
    } else {
      area += 0.5 * r * r * std::atan2(cross(p, q), p.dot(q));
    }
  }
  return area;
}

inline double clip_segment(const Point& a, const Point& b, const Point& c, double r) {
  const Point d = b - a;
  const Point f = a - c;
  const double A = d.squaredNorm();
  const double len = std::sqrt(A);
  if (A == 0.0) return 0.0;
  const double B = f.dot(d);
  const double C = f.squaredNorm() - r * r;
  const double disc = B * B - A * C;
  if (disc <= 0.0) return 0.0;
  const double s = std::sqrt(disc);
  const double t0 = std::max(0.0, (-B - s) / A);
  const double t1 = std::min(1.0, (-B + s) / A);
  return t1 > t0 ? (t1 - t0) * len : 0.0;
}

inline double clip_triangle(const Point& p0, const Point& p1, const Point& p2, const Point& c, double r) {
  const double r2 = r * r;
  const bool in0 = (p0 - c).squaredNorm() <= r2;
  const bool in1 = (p1 - c).squaredNorm() <= r2;
  const bool in2 = (p2 - c).squaredNorm() <= r2;
  const Point e1 = p1 - p0;
  const Point e2 = p2 - p0;
  const double full = 0.5 * std::sqrt(std::max(0.0, e1.squaredNorm() * e2.squaredNorm() - std::pow(e1.dot(e2), 2)));
  if (in0 && in1 && in2) return full;
  // Orthonormal frame of the triangle's plane.
  const Point u = e1.normalized();
  Point w = e2 - e2.dot(u) * u;
  const double wn = w.norm();
  if (wn == 0.0) return 0.0;
  w /= wn;
  const Point cc = c - p0;
  const Eigen::Vector2d c2(cc.dot(u), cc.dot(w));
  const double off2 = cc.squaredNorm() - c2.squaredNorm();
  const double rr2 = r2 - off2;
  if (rr2 <= 0.0) return 0.0;
  const double rr = std::sqrt(rr2);
  const Eigen::Vector2d q0 = -c2;
  const Eigen::Vector2d q1 = Eigen::Vector2d(e1.dot(u), e1.dot(w)) - c2;
  const Eigen::Vector2d q2 = Eigen::Vector2d(e2.dot(u), e2.dot(w)) - c2;
  const double a = disc_wedge_area(q0, q1, rr) + disc_wedge_area(q1, q2, rr) + disc_wedge_area(q2, q0, rr);
  return std::clamp(std::abs(a), 0.0, full);
}

inline double tet_volume(const Point& a, const Point& b, const Point& c, const Point& d) {
  return gram_volume({a, b, c, d});
}

inline double clip_tet(const Point& a, const Point& b, const Point& c, const Point& d, const Point& ctr, double r,
                       int depth) {
  const std::array<const Point*, 4> p{&a, &b, &c, &d};
  int inside = 0;
  double diam = 0.0;
  double dmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    const double dist = (*p[i] - ctr).norm();
    dmin = std::min(dmin, dist);
    if (dist <= r) ++inside;
    for (int j = i + 1; j < 4; ++j) diam = std::max(diam, (*p[i] - *p[j]).norm());
  }
  const double vol = tet_volume(a, b, c, d);
  if (inside == 4) return vol;
  if (dmin - diam > r) return 0.0;
  if (depth == 0) {
    const Point centroid = 0.25 * (a + b + c + d);
    const int in_c = (centroid - ctr).norm() <= r ? 1 : 0;
    return vol * (inside + in_c) / 5.0;
  }
  const Point ab = 0.5 * (a + b), ac = 0.5 * (a + c), ad = 0.5 * (a + d);
  const Point bc = 0.5 * (b + c), bd = 0.5 * (b + d), cd = 0.5 * (c + d);
  double s = 0.0;
  s += clip_tet(a, ab, ac, ad, ctr, r, depth - 1);
  s += clip_tet(ab, b, bc, bd, ctr, r, depth - 1);
  s += clip_tet(ac, bc, c, cd, ctr, r, depth - 1);
  s += clip_tet(ad, bd, cd, d, ctr, r, depth - 1);
  // Inner octahedron split along the ab-cd diagonal.
  s += clip_tet(ab, cd, ac, ad, ctr, r, depth - 1);
  s += clip_tet(ab, cd, ac, bc, ctr, r, depth - 1);
  s += clip_tet(ab, cd, bd, ad, ctr, r, depth - 1);
  s += clip_tet(ab, cd, bd, bc, ctr, r, depth - 1);
  return s;
}

}  // namespace detail

/// Simplicial complex of dimension <= 3 in R^d. Simplices are stored with
/// ascending vertex tuples; a user tuple carries the orientation given by the
/// sign of the permutation that sorts it. Immutable after construction.
class SimplicialComplex {
 public:
  SimplicialComplex() = default;

  /// Builds the closure of `simplices` (all faces are added). Throws
  /// MeshError on bad indices or on a simplex below `degeneracy_floor`.
  SimplicialComplex(int ambient_dim, std::vector<Point> vertices, const std::vector<std::vector<int>>& simplices,
                    double degeneracy_floor = kDegeneracyFloor)
      : ambient_dim_(ambient_dim), vertices_(std::move(vertices)), floor_(degeneracy_floor) {
    if (ambient_dim_ < 1) throw MeshError("ambient dimension must be positive");
    for (const auto& v : vertices_)
      if (v.size() != ambient_dim_) throw MeshError("vertex has wrong dimension");
    const int nv = static_cast<int>(vertices_.size());
    for (int i = 0; i < nv; ++i) {
      keys_[0].push_back(detail::make_key(std::array<int, 1>{i}));
      measures_[0].push_back(1.0);
    }
    // Insert in increasing dimension so face ids are stable.
    std::vector<const std::vector<int>*> order;
    for (const auto& s : simplices) order.push_back(&s);
    std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->size() < b->size(); });
    for (const auto* s : order) {
      if (s->empty() || s->size() > kMaxSimplexDim + 1) throw MeshError("simplex dimension out of range");
      for (int v : *s)
        if (v < 0 || v >= nv) throw MeshError("dangling vertex reference " + std::to_string(v));
      std::vector<int> sorted(*s);
      if (detail::sort_with_sign(sorted) == 0) throw MeshError("repeated vertex in simplex");
      insert(sorted);
    }
    build_incidence();
  }

  int ambient_dim() const { return ambient_dim_; }
  int max_dim() const {
    for (int k = kMaxSimplexDim; k >= 0; --k)
      if (!keys_[k].empty()) return k;
    return -1;
  }
  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_simplices(int k) const { return keys_.at(k).size(); }
  const Point& vertex(int i) const { return vertices_.at(i); }
  const std::vector<Point>& vertices() const { return vertices_; }
  double degeneracy_floor() const { return floor_; }

  /// Sorted vertex tuple of simplex (k, id).
  std::span<const int> simplex(int k, int id) const { return {keys_[k].at(id).data(), static_cast<std::size_t>(k + 1)}; }

  /// Id and orientation sign of a vertex tuple, or nullopt if absent.
  std::optional<Incidence> find(std::span<const int> verts) const {
    std::vector<int> sorted(verts.begin(), verts.end());
    const int sign = detail::sort_with_sign(sorted);
    const int k = static_cast<int>(sorted.size()) - 1;
    if (sign == 0 || k < 0 || k > kMaxSimplexDim) return std::nullopt;
    const auto it = index_[k].find(detail::make_key(sorted));
    if (it == index_[k].end()) return std::nullopt;
    return Incidence{it->second, sign};
  }

  /// Signed (k-1)-faces of simplex (k, id): face i omits vertex i, sign (-1)^i.
  std::span<const Incidence> faces(int k, int id) const {
    return {faces_[k].data() + static_cast<std::size_t>(id) * (k + 1), static_cast<std::size_t>(k + 1)};
  }
  /// Signed (k+1)-cofaces of simplex (k, id).
  const std::vector<Incidence>& cofaces(int k, int id) const { return cofaces_[k].at(id); }

  double measure(int k, int id) const { return measures_[k].at(id); }

  std::vector<Point> points(int k, int id) const {
    std::vector<Point> pts;
    for (int v : simplex(k, id)) pts.push_back(vertices_[v]);
    return pts;
  }

  /// Measure of simplex (k, id) inside the closed ball B_radius(center).
  double clipped_measure(int k, int id, const Point& center, double radius) const {
    const auto s = simplex(k, id);
    switch (k) {
      case 0:
        return (vertices_[s[0]] - center).norm() <= radius ? 1.0 : 0.0;
      case 1:
        return detail::clip_segment(vertices_[s[0]], vertices_[s[1]], center, radius);
      case 2:
        return detail::clip_triangle(vertices_[s[0]], vertices_[s[1]], vertices_[s[2]], center, radius);
      default:
        return detail::clip_tet(vertices_[s[0]], vertices_[s[1]], vertices_[s[2]], vertices_[s[3]], center, radius, 3);
    }
  }

  /// Integer incidence matrix ∂_k as (row=face id, col=simplex id, sign) triples.
  std::vector<std::array<int, 3>> incidence_triples(int k) const {
    std::vector<std::array<int, 3>> out;
    for (int id = 0; id < static_cast<int>(num_simplices(k)); ++id)
      for (const auto& f : faces(k, id)) out.push_back({f.id, id, f.sign});
    return out;
  }

 private:
  int insert(const std::vector<int>& sorted) {
    const int k = static_cast<int>(sorted.size()) - 1;
    const SimplexKey key = detail::make_key(sorted);
    if (k == 0) return sorted[0];
    if (auto it = index_[k].find(key); it != index_[k].end()) return it->second;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      std::vector<int> face(sorted);
      face.erase(face.begin() + static_cast<std::ptrdiff_t>(i));
      insert(face);
    }
    std::vector<Point> pts;
    for (int v : sorted) pts.push_back(vertices_[v]);
    const double vol = detail::gram_volume(pts);
    if (!(vol > floor_)) throw MeshError("degenerate " + std::to_string(k) + "-simplex");
    const int id = static_cast<int>(keys_[k].size());
    keys_[k].push_back(key);
    measures_[k].push_back(vol);
    index_[k].emplace(key, id);
    return id;
  }

  void build_incidence() {
    for (int k = 1; k <= kMaxSimplexDim; ++k) {
      faces_[k].clear();
      for (const auto& key : keys_[k]) {
        for (int i = 0; i <= k; ++i) {
          std::vector<int> face;
          for (int j = 0; j <= k; ++j)
            if (j != i) face.push_back(key[j]);
          const int fid = (k == 1) ? face[0] : index_[k - 1].at(detail::make_key(face));
          faces_[k].push_back({fid, (i % 2 == 0) ? 1 : -1});
        }
      }
    }
    for (int k = 0; k < kMaxSimplexDim; ++k) {
      cofaces_[k].assign(keys_[k].size(), {});
      for (int id = 0; id < static_cast<int>(keys_[k + 1].size()); ++id)
        for (const auto& f : faces(k + 1, id)) cofaces_[k][f.id].push_back({id, f.sign});
    }
    cofaces_[kMaxSimplexDim].assign(keys_[kMaxSimplexDim].size(), {});
  }

  int ambient_dim_ = 0;
  std::vector<Point> vertices_;
  double floor_ = kDegeneracyFloor;
  std::array<std::vector<SimplexKey>, kMaxSimplexDim + 1> keys_;
  std::array<std::vector<double>, kMaxSimplexDim + 1> measures_;
  std::array<std::unordered_map<SimplexKey, int, SimplexKeyHash>, kMaxSimplexDim + 1> index_;
  std::array<std::vector<Incidence>, kMaxSimplexDim + 1> faces_;
  std::array<std::vector<std::vector<Incidence>>, kMaxSimplexDim + 1> cofaces_;
};

inline SimplicialComplex build_complex(int ambient_dim, std::vector<Point> vertices,
                                       const std::vector<std::vector<int>>& simplices) {
  return SimplicialComplex(ambient_dim, std::move(vertices), simplices);
}

inline double simplex_measure(const SimplicialComplex& c, int k, int id) { return c.measure(k, id); }

inline double clip_measure_to_ball(const SimplicialComplex& c, int k, int id, const Point& center, double radius) {
  return c.clipped_measure(k, id, center, radius);
}

/// Incremental builder that merges coincident vertices and can skip
/// simplices below the degeneracy floor.
class ComplexBuilder {
 public:
  explicit ComplexBuilder(int ambient_dim, double merge_tol = 1e-11) : dim_(ambient_dim), tol_(merge_tol) {}

  int add_vertex(const Point& p) {
    std::vector<std::int64_t> key(p.size());
    for (int i = 0; i < p.size(); ++i) key[i] = static_cast<std::int64_t>(std::llround(p[i] / tol_));
    if (auto it = lookup_.find(key); it != lookup_.end()) return it->second;
    const int id = static_cast<int>(verts_.size());
    verts_.push_back(p);
    lookup_.emplace(std::move(key), id);
    return id;
  }

  /// Adds a simplex; returns false (and skips it) when it is degenerate.
  bool add_simplex(std::vector<int> verts) {
    std::vector<int> sorted(verts);
    if (detail::sort_with_sign(sorted) == 0) return false;
    std::vector<Point> pts;
    for (int v : verts) pts.push_back(verts_.at(v));
    if (!(detail::gram_volume(pts) > kDegeneracyFloor)) return false;
    simplices_.push_back(std::move(verts));
    return true;
  }

  const Point& vertex(int i) const { return verts_.at(i); }
  std::size_t num_vertices() const { return verts_.size(); }

  SimplicialComplex build() const { return SimplicialComplex(dim_, verts_, simplices_); }

 private:
  int dim_;
  double tol_;
  std::vector<Point> verts_;
  std::map<std::vector<std::int64_t>, int> lookup_;
  std::vector<std::vector<int>> simplices_;
};

// ---------------------------------------------------------------------------
// Geodesic arcs on the unit sphere.

struct GeodesicArc {
  Point from;
  Point to;
  double angle = 0.0;
};

inline double sphere_angle(const Point& a, const Point& b) {
  return 2.0 * std::atan2((a - b).norm(), (a + b).norm());
}

inline GeodesicArc make_arc(const Point& from, const Point& to) {
  if (std::abs(from.norm() - 1.0) > 1e-12 || std::abs(to.norm() - 1.0) > 1e-12)
    throw MeshError("arc endpoints must be unit vectors");
  const double angle = sphere_angle(from, to);
  if (!(angle > 0.0)) throw MeshError("arc endpoints coincide");
  return {from, to, angle};
}

/// Point at fraction s of the arc (spherical linear interpolation).
inline Point arc_point(const GeodesicArc& arc, double s) {
  const double th = arc.angle;
  const double st = std::sin(th);
  if (st < 1e-14) throw MeshError("antipodal arc has no unique interpolation");
  Point p = (std::sin((1.0 - s) * th) * arc.from + std::sin(s * th) * arc.to) / st;
  return p / p.norm();
}

/// Splits an arc into equal pieces of angle <= max_angle.
inline std::vector<GeodesicArc> subdivide_arc(const GeodesicArc& arc, double max_angle) {
  if (!(max_angle > 0.0)) throw MeshError("max_angle must be positive");
  const int m = std::max(1, static_cast<int>(std::ceil(arc.angle / max_angle - 1e-12)));
  if (m == 1) return {arc};
  std::vector<Point> pts;
  pts.push_back(arc.from);
  for (int i = 1; i < m; ++i) pts.push_back(arc_point(arc, static_cast<double>(i) / m));
  pts.push_back(arc.to);
  std::vector<GeodesicArc> out;
  for (int i = 0; i < m; ++i) out.push_back({pts[i], pts[i + 1], sphere_angle(pts[i], pts[i + 1])});
  return out;
}

// ---------------------------------------------------------------------------
// Mesh file format:
//   <ambient_dim> <k_max>
//   vertices <count>
//   <coords...>            one vertex per line, 17 significant digits
//   simplices <k> <count>  for k = 1..k_max, ids in file order
//   <vertex indices...>

inline void write_mesh(std::ostream& os, const SimplicialComplex& c) {
  const int kmax = std::max(c.max_dim(), 0);
  os << c.ambient_dim() << ' ' << kmax << '\n';
  os << "vertices " << c.num_vertices() << '\n';
  os << std::setprecision(17);
  for (const auto& v : c.vertices()) {
    for (int i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
    os << '\n';
  }
  for (int k = 1; k <= kmax; ++k) {
    os << "simplices " << k << ' ' << c.num_simplices(k) << '\n';
    for (int id = 0; id < static_cast<int>(c.num_simplices(k)); ++id) {
      const auto s = c.simplex(k, id);
      for (int i = 0; i <= k; ++i) os << (i ? " " : "") << s[i];
      os << '\n';
    }
  }
}

inline SimplicialComplex read_mesh(std::istream& is) {
  int dim = 0, kmax = 0;
  std::string tag;
  std::size_t nv = 0;
  if (!(is >> dim >> kmax >> tag >> nv) || tag != "vertices") throw MeshError("malformed mesh header");
  std::vector<Point> verts(nv, Point(dim));
  for (auto& v : verts)
    for (int i = 0; i < dim; ++i)
      if (!(is >> v[i])) throw MeshError("malformed vertex line");
  std::vector<std::vector<int>> simplices;
  for (int k = 1; k <= kmax; ++k) {
    int kk = 0;
    std::size_t n = 0;
    if (!(is >> tag >> kk >> n) || tag != "simplices" || kk != k) throw MeshError("malformed simplex block header");
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<int> s(k + 1);
      for (auto& v : s)
        if (!(is >> v)) throw MeshError("malformed simplex line");
      simplices.push_back(std::move(s));
    }
  }
  return SimplicialComplex(dim, std::move(verts), simplices);
}

inline void save_mesh(const std::string& path, const SimplicialComplex& c) {
  std::ofstream os(path);
  if (!os) throw MeshError("cannot open " + path);
  write_mesh(os, c);
}

inline SimplicialComplex load_mesh(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw MeshError("cannot open " + path);
  return read_mesh(is);
}

}  // namespace conelab
