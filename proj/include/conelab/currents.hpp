#pragma once

// Integer polyhedral chains on a simplicial complex and 1-chains of geodesic
// arcs on the unit sphere.

#include "conelab/mesh.hpp"

#include <cstdlib>
#include <functional>
#include <memory>

namespace conelab {

using ComplexPtr = std::shared_ptr<const SimplicialComplex>;

struct Ball {
  Point center;
  double radius;
};

/// Sparse integer k-chain. Coefficients are relative to the stored (sorted)
/// orientation of each simplex; zero coefficients are never kept.
class Chain {
 public:
  Chain() = default;
  Chain(ComplexPtr complex, int dim) : complex_(std::move(complex)), dim_(dim) {
    if (!complex_) throw MeshError("chain needs a complex");
    if (dim_ < 0 || dim_ > kMaxSimplexDim) throw MeshError("chain dimension out of range");
  }

  const SimplicialComplex& complex() const { return *complex_; }
  const ComplexPtr& complex_ptr() const { return complex_; }
  int dim() const { return dim_; }
  const std::map<int, long long>& coeffs() const& { return coeffs_; }
  // By value on temporaries, so `for (... : boundary(c).coeffs())` is safe.
  std::map<int, long long> coeffs() && { return std::move(coeffs_); }
  bool empty() const { return coeffs_.empty(); }

  long long coeff(int id) const {
    const auto it = coeffs_.find(id);
    return it == coeffs_.end() ? 0 : it->second;
  }

  void add(int id, long long c) {
    if (c == 0) return;
    if (id < 0 || id >= static_cast<int>(complex_->num_simplices(dim_))) throw MeshError("simplex id out of range");
    auto [it, inserted] = coeffs_.try_emplace(id, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) coeffs_.erase(it);
    }
  }

  /// Adds c times the simplex with the given (oriented) vertex tuple.
  void add_oriented(std::span<const int> verts, long long c) {
    const auto inc = complex_->find(verts);
    if (!inc || static_cast<int>(verts.size()) != dim_ + 1) throw MeshError("simplex not in complex");
    add(inc->id, c * inc->sign);
  }

  Chain& operator+=(const Chain& o) {
    check_compatible(o);
    for (const auto& [id, c] : o.coeffs_) add(id, c);
    return *this;
  }
  Chain& operator-=(const Chain& o) {
    check_compatible(o);
    for (const auto& [id, c] : o.coeffs_) add(id, -c);
    return *this;
  }
  friend Chain operator+(Chain a, const Chain& b) { return a += b; }
  friend Chain operator-(Chain a, const Chain& b) { return a -= b; }
  friend Chain operator*(long long s, Chain a) {
    if (s == 0) {
      a.coeffs_.clear();
      return a;
    }
    for (auto& [id, c] : a.coeffs_) c *= s;
    return a;
  }
  Chain operator-() const { return -1LL * *this; }

  friend bool operator==(const Chain& a, const Chain& b) {
    return a.complex_ == b.complex_ && a.dim_ == b.dim_ && a.coeffs_ == b.coeffs_;
  }

  void check_compatible(const Chain& o) const {
    if (complex_ != o.complex_) throw MeshError("chains live on different complexes");
    if (dim_ != o.dim_) throw MeshError("chain dimension mismatch");
  }

 private:
  ComplexPtr complex_;
  int dim_ = 0;
  std::map<int, long long> coeffs_;
};

inline Chain boundary(const Chain& c) {
  if (c.dim() < 1) throw MeshError("boundary of a 0-chain");
  Chain out(c.complex_ptr(), c.dim() - 1);
  for (const auto& [id, coef] : c.coeffs())
    for (const auto& f : c.complex().faces(c.dim(), id)) out.add(f.id, coef * f.sign);
  return out;
}

inline double mass(const Chain& c, const std::optional<Ball>& ball = std::nullopt) {
  double m = 0.0;
  for (const auto& [id, coef] : c.coeffs()) {
    const double w = ball ? c.complex().clipped_measure(c.dim(), id, ball->center, ball->radius)
                          : c.complex().measure(c.dim(), id);
    m += static_cast<double>(std::llabs(coef)) * w;
  }
  return m;
}

/// Pushes a chain forward by a vertex map. The simplex tuples are kept, so
/// orientation travels with vertex order; a map that collapses a simplex
/// below the degeneracy floor throws MeshError.
inline Chain pushforward(const Chain& c, const std::function<Point(const Point&)>& map) {
  const auto& cx = c.complex();
  std::vector<Point> verts;
  verts.reserve(cx.num_vertices());
  for (const auto& v : cx.vertices()) verts.push_back(map(v));
  std::vector<std::vector<int>> simplices;
  for (int k = 1; k <= std::max(cx.max_dim(), 0); ++k)
    for (int id = 0; id < static_cast<int>(cx.num_simplices(k)); ++id) {
      const auto s = cx.simplex(k, id);
      simplices.emplace_back(s.begin(), s.end());
    }
  auto mapped = std::make_shared<const SimplicialComplex>(cx.ambient_dim(), std::move(verts), simplices,
                                                          cx.degeneracy_floor());
  Chain out(mapped, c.dim());
  for (const auto& [id, coef] : c.coeffs()) out.add(id, coef);
  return out;
}

/// Collects oriented simplices with coefficients and builds complex + chain.
class ChainBuilder {
 public:
  ChainBuilder(int ambient_dim, int dim) : builder_(ambient_dim), dim_(dim) {}

  int add_vertex(const Point& p) { return builder_.add_vertex(p); }
  const Point& vertex(int i) const { return builder_.vertex(i); }

  /// Adds coef times the oriented simplex; degenerate simplices are skipped.
  bool add(std::vector<int> verts, long long coef) {
    if (!builder_.add_simplex(verts)) return false;
    terms_.emplace_back(std::move(verts), coef);
    return true;
  }
  /// Adds a simplex to the complex without putting it in the chain.
  bool add_support(std::vector<int> verts) { return builder_.add_simplex(std::move(verts)); }

  Chain build() const {
    auto cx = std::make_shared<const SimplicialComplex>(builder_.build());
    Chain c(cx, dim_);
    for (const auto& [v, coef] : terms_) c.add_oriented(v, coef);
    return c;
  }

 private:
  ComplexBuilder builder_;
  int dim_;
  std::vector<std::pair<std::vector<int>, long long>> terms_;
};

/// Re-expresses a chain on another complex that contains the same simplices
/// (matched by vertex position).
inline Chain transfer(const Chain& c, const ComplexPtr& target, double tol = 1e-11) {
  std::map<std::vector<std::int64_t>, int> lookup;
  auto key = [&](const Point& p) {
    std::vector<std::int64_t> k(p.size());
    for (int i = 0; i < p.size(); ++i) k[i] = static_cast<std::int64_t>(std::llround(p[i] / tol));
    return k;
  };
  for (int i = 0; i < static_cast<int>(target->num_vertices()); ++i) lookup.emplace(key(target->vertex(i)), i);
  Chain out(target, c.dim());
  for (const auto& [id, coef] : c.coeffs()) {
    std::vector<int> verts;
    for (int v : c.complex().simplex(c.dim(), id)) {
      const auto it = lookup.find(key(c.complex().vertex(v)));
      if (it == lookup.end()) throw MeshError("transfer: vertex missing in target complex");
      verts.push_back(it->second);
    }
    out.add_oriented(verts, coef);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Support sampling and Hausdorff distance.

/// Points on the support of a chain with spacing about h.
inline std::vector<Point> sample_support(const Chain& c, double h, const std::optional<Ball>& ball = std::nullopt) {
  std::vector<Point> out;
  const auto& cx = c.complex();
  auto keep = [&](const Point& p) {
    if (!ball || (p - ball->center).norm() <= ball->radius) out.push_back(p);
  };
  for (const auto& [id, coef] : c.coeffs()) {
    const auto pts = cx.points(c.dim(), id);
    double diam = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) diam = std::max(diam, (pts[i] - pts[j]).norm());
    const int m = std::max(1, static_cast<int>(std::ceil(diam / h)));
    if (c.dim() == 0) {
      keep(pts[0]);
    } else if (c.dim() == 1) {
      for (int i = 0; i <= m; ++i) keep(pts[0] + (pts[1] - pts[0]) * (static_cast<double>(i) / m));
    } else {
      // Barycentric grid on the first three vertices (and the fourth for tets
      // through its faces' grids).
      for (int i = 0; i <= m; ++i)
        for (int j = 0; i + j <= m; ++j) {
          const double a = static_cast<double>(i) / m, b = static_cast<double>(j) / m;
          keep(pts[0] + a * (pts[1] - pts[0]) + b * (pts[2] - pts[0]));
          if (c.dim() == 3) keep(pts[3] + a * (pts[1] - pts[3]) + b * (pts[2] - pts[3]));
        }
    }
  }
  return out;
}

inline double directed_hausdorff(const std::vector<Point>& a, const std::vector<Point>& b) {
  double worst = 0.0;
  for (const auto& p : a) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : b) {
      best = std::min(best, (p - q).squaredNorm());
      if (best <= worst) break;
    }
    worst = std::max(worst, best);
  }
  return std::sqrt(worst);
}

inline double hausdorff_points(const std::vector<Point>& a, const std::vector<Point>& b) {
  if (a.empty() || b.empty()) throw MeshError("Hausdorff distance of an empty support");
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

inline double hausdorff_distance(const Chain& a, const Chain& b, double h) {
  return hausdorff_points(sample_support(a, h), sample_support(b, h));
}

// ---------------------------------------------------------------------------
// Spherical 1-chains.

struct SphericalArc {
  GeodesicArc arc;
  long long multiplicity = 1;
  int orientation = 1;

  long long coefficient() const { return multiplicity * orientation; }
};

struct SphericalChain {
  std::vector<SphericalArc> arcs;

  void add(const GeodesicArc& a, long long mult = 1, int orientation = 1) {
    if (mult != 0) arcs.push_back({a, mult, orientation});
  }
  void append(const SphericalChain& o) { arcs.insert(arcs.end(), o.arcs.begin(), o.arcs.end()); }

  /// Σ |mult| · angle.
  double mass() const {
    double m = 0.0;
    for (const auto& a : arcs) m += static_cast<double>(std::llabs(a.coefficient())) * a.arc.angle;
    return m;
  }
  bool empty() const { return arcs.empty(); }
  int ambient_dim() const { return arcs.empty() ? 0 : static_cast<int>(arcs.front().arc.from.size()); }
};

/// Identifies sphere points up to a tolerance (quantized coordinates).
class SpherePointIndex {
 public:
  explicit SpherePointIndex(double tol = 1e-9) : tol_(tol) {}

  int id(const Point& p) {
    auto k = key(p);
    if (auto it = map_.find(k); it != map_.end()) return it->second;
    // Neighbouring cells catch points straddling a quantization boundary.
    for (const auto& [kk, v] : map_)
      if ((points_[v] - p).norm() <= tol_) return v;
    const int i = static_cast<int>(points_.size());
    points_.push_back(p);
    map_.emplace(std::move(k), i);
    return i;
  }
  std::optional<int> find(const Point& p) const {
    if (auto it = map_.find(key(p)); it != map_.end()) return it->second;
    for (std::size_t i = 0; i < points_.size(); ++i)
      if ((points_[i] - p).norm() <= tol_) return static_cast<int>(i);
    return std::nullopt;
  }
  const Point& point(int i) const { return points_.at(i); }
  std::size_t size() const { return points_.size(); }

 private:
  std::vector<std::int64_t> key(const Point& p) const {
    std::vector<std::int64_t> k(p.size());
    for (int i = 0; i < p.size(); ++i) k[i] = static_cast<std::int64_t>(std::floor(p[i] / (4.0 * tol_)));
    return k;
  }
  double tol_;
  std::vector<Point> points_;
  std::map<std::vector<std::int64_t>, int> map_;
};

/// Boundary 0-chain as (point, coefficient) pairs with zero entries dropped.
inline std::vector<std::pair<Point, long long>> spherical_boundary(const SphericalChain& z, double tol = 1e-9) {
  SpherePointIndex index(tol);
  std::map<int, long long> acc;
  for (const auto& a : z.arcs) {
    acc[index.id(a.arc.to)] += a.coefficient();
    acc[index.id(a.arc.from)] -= a.coefficient();
  }
  std::vector<std::pair<Point, long long>> out;
  for (const auto& [id, c] : acc)
    if (c != 0) out.emplace_back(index.point(id), c);
  return out;
}

/// Net multiplicity per undirected arc, keyed by endpoint ids (lower id
/// first; coefficient counts traversal from lower to higher id).
inline std::map<std::pair<int, int>, long long> arc_multiplicities(const SphericalChain& z, SpherePointIndex& index) {
  std::map<std::pair<int, int>, long long> out;
  for (const auto& a : z.arcs) {
    const int i = index.id(a.arc.from), j = index.id(a.arc.to);
    if (i < j)
      out[{i, j}] += a.coefficient();
    else
      out[{j, i}] -= a.coefficient();
  }
  std::erase_if(out, [](const auto& kv) { return kv.second == 0; });
  return out;
}

inline std::vector<Point> sample_support(const SphericalChain& z, double h) {
  std::vector<Point> out;
  for (const auto& a : z.arcs) {
    const int m = std::max(1, static_cast<int>(std::ceil(a.arc.angle / h)));
    for (int i = 0; i <= m; ++i) out.push_back(arc_point(a.arc, static_cast<double>(i) / m));
  }
  return out;
}

inline double hausdorff_distance(const SphericalChain& a, const SphericalChain& b, double h = 0.005) {
  return hausdorff_points(sample_support(a, h), sample_support(b, h));
}

struct ConeOver {
  Chain chain;
  double exact_mass;
};

/// Cone ⟦0⟧×Z as a fan of flat triangles (one per arc) plus the exact sector
/// mass Σ |mult| · angle / 2.
inline ConeOver cone_over(const SphericalChain& z) {
  if (z.empty()) throw MeshError("cone over an empty chain");
  const int dim = z.ambient_dim();
  ChainBuilder b(dim, 2);
  const int origin = b.add_vertex(Point::Zero(dim));
  double exact = 0.0;
  for (const auto& a : z.arcs) {
    if (a.arc.angle >= std::numbers::pi - 1e-12) throw MeshError("antipodal arc: subdivide before coning");
    if (std::abs(a.arc.from.norm() - 1.0) > 1e-12 || std::abs(a.arc.to.norm() - 1.0) > 1e-12)
      throw MeshError("arc is not on the unit sphere");
    exact += static_cast<double>(std::llabs(a.coefficient())) * a.arc.angle / 2.0;
    b.add({origin, b.add_vertex(a.arc.from), b.add_vertex(a.arc.to)}, a.coefficient());
  }
  return {b.build(), exact};
}

/// Polygonal 1-chain of the arcs' chords on a fresh complex.
inline Chain chord_chain(const SphericalChain& z) {
  ChainBuilder b(z.ambient_dim(), 1);
  for (const auto& a : z.arcs) b.add({b.add_vertex(a.arc.from), b.add_vertex(a.arc.to)}, a.coefficient());
  return b.build();
}

// ---------------------------------------------------------------------------
// Chain files: "mesh <path>" then lines "k simplex_id coeff".

inline void write_chain(std::ostream& os, const Chain& c, const std::string& mesh_path) {
  os << "mesh " << mesh_path << '\n';
  for (const auto& [id, coef] : c.coeffs()) os << c.dim() << ' ' << id << ' ' << coef << '\n';
}

inline Chain read_chain(std::istream& is, const ComplexPtr& complex) {
  std::string tag, path;
  if (!(is >> tag >> path) || tag != "mesh") throw MeshError("chain file must start with 'mesh <path>'");
  std::optional<Chain> c;
  int k = 0, id = 0;
  long long coef = 0;
  while (is >> k >> id >> coef) {
    if (!c) c.emplace(complex, k);
    if (k != c->dim()) throw MeshError("mixed dimensions in chain file");
    c->add(id, coef);
  }
  if (!c) throw MeshError("chain file has no coefficients; dimension unknown");
  return *c;
}

/// Reads only the mesh path of a chain file.
inline std::string chain_mesh_path(std::istream& is) {
  std::string tag, path;
  if (!(is >> tag >> path) || tag != "mesh") throw MeshError("chain file must start with 'mesh <path>'");
  return path;
}

inline void write_chain_csv(std::ostream& os, const Chain& c) {
  os << "simplex_id,measure,coeff\n" << std::setprecision(17);
  for (const auto& [id, coef] : c.coeffs()) os << id << ',' << c.complex().measure(c.dim(), id) << ',' << coef << '\n';
}

// Spherical chain files: "spherical <dim>" then lines
// "arc <from coords> <to coords> <multiplicity>".
inline void write_spherical(std::ostream& os, const SphericalChain& z) {
  os << "spherical " << z.ambient_dim() << '\n' << std::setprecision(17);
  for (const auto& a : z.arcs) {
    os << "arc";
    for (int i = 0; i < a.arc.from.size(); ++i) os << ' ' << a.arc.from[i];
    for (int i = 0; i < a.arc.to.size(); ++i) os << ' ' << a.arc.to[i];
    os << ' ' << a.coefficient() << '\n';
  }
}

inline SphericalChain read_spherical(std::istream& is) {
  std::string tag;
  int dim = 0;
  if (!(is >> tag >> dim) || tag != "spherical" || dim < 2) throw MeshError("malformed spherical chain header");
  SphericalChain z;
  while (is >> tag) {
    if (tag != "arc") throw MeshError("unexpected token '" + tag + "'");
    Point a(dim), b(dim);
    long long m = 0;
    for (int i = 0; i < dim; ++i) is >> a[i];
    for (int i = 0; i < dim; ++i) is >> b[i];
    if (!(is >> m)) throw MeshError("malformed arc line");
    z.add(make_arc(a, b), m);
  }
  return z;
}

}  // namespace conelab
