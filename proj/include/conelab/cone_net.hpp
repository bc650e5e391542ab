#pragma once

// Sampling the space of boundary cones with bounded density, and greedy
// epsilon-nets in flat distance.

#include "conelab/cones.hpp"
#include "conelab/flatnorm.hpp"

#include <Eigen/QR>

#include <future>
#include <random>
#include <thread>

namespace conelab {

/// Combinatorial type of a cone: multiplicities without orientations.
struct ConeShape {
  std::vector<int> interior;   // plane multiplicities, non-increasing
  std::vector<int> open_book;  // page multiplicities, non-increasing
  int closed_plus = 0, closed_minus = 0;

  bool closed() const { return closed_minus > 0; }
  long long twice_density() const {
    long long t = 0;
    for (int m : interior) t += 2 * m;
    for (int m : open_book) t += m;
    return t + closed_plus + closed_minus;
  }
  friend bool operator==(const ConeShape&, const ConeShape&) = default;
};

namespace detail {

inline void partitions(int n, int max_part, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (n == 0) {
    out.push_back(cur);
    return;
  }
  for (int p = std::min(n, max_part); p >= 1; --p) {
    cur.push_back(p);
    partitions(n - p, p, cur, out);
    cur.pop_back();
  }
}

inline std::vector<std::vector<int>> partitions(int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  partitions(n, n, cur, out);
  return out;
}

}  // namespace detail

/// All shapes with boundary multiplicity Q and density <= Qbar/2 that can be
/// realized in R^{2+n}.
inline std::vector<ConeShape> enumerate_shapes(int q, int qbar, int n) {
  if (q < 0 || qbar < q || n < 1) throw ConeError("empty cone space: need Qbar >= Q >= 0 and n >= 1");
  std::vector<ConeShape> boundary_parts;
  if (q == 0) {
    boundary_parts.push_back({});
  } else {
    for (auto& p : detail::partitions(q)) boundary_parts.push_back({{}, p, 0, 0});
    for (int qm = 1; q + 2 * qm <= qbar; ++qm) boundary_parts.push_back({{}, {}, q + qm, qm});
  }
  std::vector<ConeShape> out;
  for (const auto& b : boundary_parts) {
    const long long tb = b.twice_density();
    if (tb > qbar) continue;
    for (int interior = 0; tb + 2 * interior <= qbar; ++interior) {
      for (auto& parts : detail::partitions(interior)) {
        ConeShape s = b;
        s.interior = parts;
        if (s.twice_density() == 0) continue;
        // In R^3 two planes always share a line, and a plane always meets a
        // half-plane along a ray.
        if (n == 1 && (s.interior.size() > 1 || (!s.interior.empty() && q > 0))) continue;
        out.push_back(s);
      }
    }
  }
  if (out.empty()) throw ConeError("empty cone space");
  return out;
}

inline ConeShape shape_of(const ConeSpec& s) {
  ConeShape sh;
  for (const auto& p : s.interior_planes) sh.interior.push_back(p.mult);
  if (boundary_is_closed_book(s)) {
    for (const auto& h : s.halfplanes) (h.mult > 0 ? sh.closed_plus : sh.closed_minus) = std::abs(h.mult);
  } else {
    for (const auto& h : s.halfplanes) sh.open_book.push_back(h.mult);
  }
  std::sort(sh.interior.rbegin(), sh.interior.rend());
  std::sort(sh.open_book.rbegin(), sh.open_book.rend());
  return sh;
}

struct SamplerOptions {
  double min_separation = 0.2;  // radians, between sheets and from l
  int max_attempts = 10000;
};

/// Samples a cone of the given shape with l = e_1 and rotation-invariant
/// orientations (Gaussian frames orthonormalized by QR, with rejection).
template <class Rng>
ConeSpec sample_cone_of_shape(const ConeShape& shape, int n, Rng& rng, const SamplerOptions& opt = {}) {
  const int d = n + 2;
  std::normal_distribution<double> g;
  ConeSpec s;
  s.n = n;
  s.line = Point::Zero(d);
  s.line[0] = 1.0;
  const double sep = std::sin(opt.min_separation);
  auto gaussian = [&] {
    Point p(d);
    for (int i = 0; i < d; ++i) p[i] = g(rng);
    return p;
  };
  auto page = [&] {
    for (;;) {
      Point v = gaussian();
      v -= s.line * s.line.dot(v);
      if (v.norm() > 1e-6) return Point(v.normalized());
    }
  };
  for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
    s.halfplanes.clear();
    s.interior_planes.clear();
    bool ok = true;
    if (shape.closed()) {
      const Point v = page();
      s.halfplanes.push_back({v, shape.closed_plus});
      s.halfplanes.push_back({Point(-v), -shape.closed_minus});
    } else {
      for (int m : shape.open_book) {
        const Point v = page();
        for (const auto& h : s.halfplanes) ok = ok && std::acos(std::clamp(v.dot(h.v), -1.0, 1.0)) >= opt.min_separation;
        s.halfplanes.push_back({v, m});
      }
    }
    for (int m : shape.interior) {
      Eigen::MatrixXd a(d, 2);
      for (int j = 0; j < 2; ++j) a.col(j) = gaussian();
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
      const Eigen::MatrixXd qm = qr.householderQ() * Eigen::MatrixXd::Identity(d, 2);
      InteriorPlane p{qm.col(0), qm.col(1), m};
      const Point off = s.line - p.a * p.a.dot(s.line) - p.b * p.b.dot(s.line);
      ok = ok && off.norm() >= sep;
      for (const auto& o : s.interior_planes)
        ok = ok && detail::smallest_singular_value(detail::columns({&p.a, &p.b, &o.a, &o.b})) >= sep;
      for (const auto& h : s.halfplanes)
        ok = ok && detail::smallest_singular_value(detail::columns({&p.a, &p.b, &s.line, &h.v})) >= sep;
      s.interior_planes.push_back(p);
    }
    if (!ok) continue;
    s.case_tag = infer_case(s);
    validate(s);
    return s;
  }
  throw ConeError("could not sample a configuration satisfying the separation constraints");
}

/// Uniform over the enumerated shapes, then orientations as above.
inline ConeSpec sample_cone_space(int q, int qbar, int n, std::uint64_t seed, const SamplerOptions& opt = {}) {
  std::mt19937_64 rng(seed);
  const auto shapes = enumerate_shapes(q, qbar, n);
  std::uniform_int_distribution<std::size_t> pick(0, shapes.size() - 1);
  return sample_cone_of_shape(shapes[pick(rng)], n, rng, opt);
}

// ---------------------------------------------------------------------------
// Flat distance between cones, bounded above.

/// Upper bound for the flat distance in B_1 between two sheets of the same
/// multiplicity: the mass inside B_1 of the linear homotopy
///   h(t, p) = ((1 - t) A + t B) p,   p in the parameter plane (or half-plane),
/// between the (infinite) sheets with frames A = (a1, a2), B = (b1, b2). The
/// swept rim lies outside B_1, so only the 3-dimensional sweep and, for
/// half-planes, the sweep of the edge line count. Along each ray the integrand
/// is homogeneous, so the radial integral is done in closed form.
inline double sheet_homotopy_bound(const Point& a1, const Point& a2, const Point& b1, const Point& b2, bool half,
                                   int mult, int n_theta = 96, int n_t = 48) {
  const double span = half ? std::numbers::pi : 2.0 * std::numbers::pi;
  double vol = 0.0;
  for (int it = 0; it < n_t; ++it) {
    const double t = (it + 0.5) / n_t;
    const Point m1 = (1.0 - t) * a1 + t * b1, m2 = (1.0 - t) * a2 + t * b2;
    for (int ith = 0; ith < n_theta; ++ith) {
      const double th = span * (ith + 0.5) / n_theta;
      const double c = std::cos(th), s = std::sin(th);
      const Point dir = c * m1 + s * m2;
      const double len = dir.norm();
      if (len < 1e-12) continue;
      const Point dt = c * (b1 - a1) + s * (b2 - a2);
      Eigen::Matrix3d g;
      const Point* v[3] = {&dt, &m1, &m2};
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) g(i, j) = v[i]->dot(*v[j]);
      // Volume element r^2 * sqrt(det G) dr dtheta dt, for r < 1 / len.
      const double rmax = 1.0 / len;
      vol += std::sqrt(std::max(0.0, g.determinant())) * rmax * rmax * rmax / 3.0;
    }
  }
  vol *= span / n_theta / n_t;
  double edge = 0.0;
  if (half) {
    // The line s * a1 moves to s * b1; area element |s| |(b1 - a1) ^ m| ds dt.
    for (int it = 0; it < n_t; ++it) {
      const double t = (it + 0.5) / n_t;
      const Point m = (1.0 - t) * a1 + t * b1;
      const Point d = b1 - a1;
      const double wedge = std::sqrt(std::max(0.0, d.squaredNorm() * m.squaredNorm() - std::pow(d.dot(m), 2)));
      const double smax = 1.0 / std::max(m.norm(), 1e-12);
      edge += wedge * smax * smax;  // two half-lines, each |s|^2/2
    }
    edge /= n_t;
  }
  return std::abs(mult) * (vol + edge);
}

/// Flat distance in B_1 between two sheets of radius `radius` > 1 computed by
/// the LP on the complex swept by linearly interpolating their frames. Any
/// competitor on that complex is admissible, so this is also an upper bound.
inline double sheet_prism_distance(const Point& a1, const Point& a2, const Point& b1, const Point& b2, bool half,
                                   int mult, double h, double radius = 1.25) {
  const ParamMesh m = uniform_polar_mesh(radius, h, half);
  const int d = static_cast<int>(a1.size());
  ComplexBuilder cb(d);
  std::vector<int> ia, ib;
  for (const auto& p : m.points) {
    ia.push_back(cb.add_vertex(p.x() * a1 + p.y() * a2));
    ib.push_back(cb.add_vertex(p.x() * b1 + p.y() * b2));
  }
  std::vector<std::array<int, 3>> ta, tb;
  for (const auto& t : m.triangles) {
    if (cb.add_simplex({ia[t[0]], ia[t[1]], ia[t[2]]})) ta.push_back({ia[t[0]], ia[t[1]], ia[t[2]]});
    if (cb.add_simplex({ib[t[0]], ib[t[1]], ib[t[2]]})) tb.push_back({ib[t[0]], ib[t[1]], ib[t[2]]});
    // Staircase split by parameter index keeps shared quad faces consistent.
    std::array<int, 3> s = t;
    std::sort(s.begin(), s.end());
    const int i = s[0], j = s[1], k = s[2];
    cb.add_simplex({ia[i], ia[j], ia[k], ib[k]});
    cb.add_simplex({ia[i], ia[j], ib[j], ib[k]});
    cb.add_simplex({ia[i], ib[i], ib[j], ib[k]});
  }
  auto cx = std::make_shared<const SimplicialComplex>(cb.build());
  Chain ta_chain(cx, 2), tb_chain(cx, 2);
  for (const auto& t : ta) ta_chain.add_oriented(t, mult);
  for (const auto& t : tb) tb_chain.add_oriented(t, mult);
  const Ball unit_ball{Point::Zero(d), 1.0};
  if (ta_chain == tb_chain) return 0.0;
  if (cx->num_simplices(3) == 0) return mass(ta_chain - tb_chain, unit_ball);
  return flat_distance(ta_chain, tb_chain, 1.0).value;
}

/// Upper bound for the flat distance in B_1 between two cones. Cones of
/// different shapes get the trivial bound M(S_a) + M(S_b).
inline double cone_distance_upper(const ConeSpec& a, const ConeSpec& b) {
  const double trivial = cone_exact_mass(a) + cone_exact_mass(b);
  if (a.n != b.n || !(shape_of(a) == shape_of(b))) return trivial;
  // Pair sheets with equal multiplicities, choosing the pairing with the
  // smallest total frame mismatch.
  auto best_perm = [](auto const& xs, auto const& ys, auto cost) {
    std::vector<int> perm(ys.size()), best;
    std::iota(perm.begin(), perm.end(), 0);
    double best_cost = std::numeric_limits<double>::infinity();
    do {
      double c = 0.0;
      bool ok = true;
      for (std::size_t i = 0; i < xs.size() && ok; ++i) {
        ok = xs[i].mult == ys[perm[i]].mult;
        c += cost(xs[i], ys[perm[i]]);
      }
      if (ok && c < best_cost) {
        best_cost = c;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  };
  double total = 0.0;
  const auto pi = best_perm(a.interior_planes, b.interior_planes, detail::plane_distance);
  for (std::size_t i = 0; i < pi.size(); ++i) {
    const auto &p = a.interior_planes[i], &r = b.interior_planes[pi[i]];
    total += sheet_homotopy_bound(p.a, p.b, r.a, r.b, false, p.mult);
  }
  const auto ph = best_perm(a.halfplanes, b.halfplanes, [](const HalfPlane& x, const HalfPlane& y) { return (x.v - y.v).norm(); });
  for (std::size_t i = 0; i < ph.size(); ++i) {
    const auto &p = a.halfplanes[i], &r = b.halfplanes[ph[i]];
    total += sheet_homotopy_bound(a.line, p.v, b.line, r.v, true, p.mult);
  }
  return std::min(total, trivial);
}

struct NetOptions {
  int pool = 200;        // candidate samples offered to the greedy net
  int size_cap = 400;
  unsigned workers = 0;  // 0 means hardware concurrency
  SamplerOptions sampler;
};

struct NetReport {
  std::vector<ConeSpec> net;
  int trials = 0;
  int covered = 0;
  double worst_distance = 0.0;  // max over trials of the distance to the net
  std::vector<double> trial_distances;
};

inline NetReport cone_space_net(int q, int qbar, int n, double eps, int trials, std::uint64_t seed,
                                const NetOptions& opt = {}) {
  if (!(eps > 0.0)) throw ConeError("epsilon must be positive");
  if (trials < 0) throw ConeError("trials must be non-negative");
  const auto shapes = enumerate_shapes(q, qbar, n);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, shapes.size() - 1);
  auto draw = [&] { return sample_cone_of_shape(shapes[pick(rng)], n, rng, opt.sampler); };

  NetReport rep;
  for (int i = 0; i < opt.pool; ++i) {
    ConeSpec c = draw();
    bool near = false;
    for (const auto& m : rep.net)
      if (cone_distance_upper(c, m) <= eps) {
        near = true;
        break;
      }
    if (near) continue;
    rep.net.push_back(std::move(c));
    if (static_cast<int>(rep.net.size()) > opt.size_cap)
      throw ConeError("net exceeds the size cap; epsilon is too small for this mesh resolution");
  }

  std::vector<ConeSpec> fresh;
  for (int i = 0; i < trials; ++i) fresh.push_back(draw());
  rep.trials = trials;
  rep.trial_distances.assign(trials, 0.0);
  const unsigned workers = std::max(1u, opt.workers ? opt.workers : std::thread::hardware_concurrency());
  std::vector<std::future<void>> jobs;
  for (unsigned w = 0; w < workers; ++w)
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (int i = static_cast<int>(w); i < trials; i += static_cast<int>(workers)) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& m : rep.net) {
          best = std::min(best, cone_distance_upper(fresh[i], m));
          if (best <= eps) break;
        }
        rep.trial_distances[i] = best;
      }
    }));
  for (auto& j : jobs) j.get();
  for (double dist : rep.trial_distances) {
    if (dist <= eps) ++rep.covered;
    rep.worst_distance = std::max(rep.worst_distance, dist);
  }
  return rep;
}

}  // namespace conelab
