#pragma once

// Splitting spherical 1-chains into simple P -> N paths and simple cycles,
// and the grouping of those pieces along the sheets of a cone.

#include "conelab/cones.hpp"
#include "conelab/flatnorm.hpp"

#include <numeric>
#include <sstream>

namespace conelab {

struct DecomposeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A simple directed path or cycle; every arc carries multiplicity one.
struct Piece {
  SphericalChain chain;
  std::vector<int> nodes;  // visited node ids, first == last for cycles
  bool closed = false;
  double mass() const { return chain.mass(); }
};

struct PieceDecomposition {
  int q = 0;
  Point p, n;  // boundary points, empty when q == 0
  std::vector<Piece> paths;
  std::vector<Piece> cycles;
};

/// Merges arcs with the same endpoints, so opposite traversals cancel.
inline SphericalChain canonicalize(const SphericalChain& z, SpherePointIndex& index) {
  std::map<std::pair<int, int>, const GeodesicArc*> geometry;
  for (const auto& a : z.arcs) {
    const int i = index.id(a.arc.from), j = index.id(a.arc.to);
    if (i == j) throw DecomposeError("degenerate arc");
    geometry.try_emplace(i < j ? std::pair{i, j} : std::pair{j, i}, &a.arc);
  }
  SphericalChain out;
  for (const auto& [key, c] : arc_multiplicities(z, index)) {
    const GeodesicArc& g = *geometry.at(key);
    // Store with orientation from the lower id to the higher id.
    const bool forward = index.id(g.from) == key.first;
    const GeodesicArc arc = forward ? g : GeodesicArc{g.to, g.from, g.angle};
    out.add(arc, std::llabs(c), c > 0 ? 1 : -1);
  }
  return out;
}

namespace detail {

struct DirectedEdge {
  int from, to;
  GeodesicArc arc;  // oriented from -> to
};

inline Piece make_piece(const std::vector<DirectedEdge>& edges, const std::vector<int>& ids, bool closed) {
  Piece p;
  p.closed = closed;
  for (int e : ids) {
    p.chain.add(edges[e].arc, 1, 1);
    if (p.nodes.empty()) p.nodes.push_back(edges[e].from);
    p.nodes.push_back(edges[e].to);
  }
  return p;
}

}  // namespace detail

/// Peels Z into q simple P -> N paths and simple cycles, consuming arcs in
/// order of their id so the result is reproducible.
inline PieceDecomposition indecomposable_pieces(const SphericalChain& z_in, double tol = 1e-9) {
  SpherePointIndex index(tol);
  const SphericalChain z = canonicalize(z_in, index);
  std::vector<detail::DirectedEdge> edges;
  for (const auto& a : z.arcs) {
    const GeodesicArc arc = a.orientation > 0 ? a.arc : GeodesicArc{a.arc.to, a.arc.from, a.arc.angle};
    for (long long c = 0; c < a.multiplicity; ++c) edges.push_back({index.id(arc.from), index.id(arc.to), arc});
  }
  const int nodes = static_cast<int>(index.size());
  std::vector<long long> balance(nodes, 0);
  std::vector<std::vector<int>> out(nodes);
  for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
    balance[edges[e].to] += 1;
    balance[edges[e].from] -= 1;
    out[edges[e].from].push_back(e);
  }
  PieceDecomposition res;
  int pn = -1, nn = -1;
  for (int v = 0; v < nodes; ++v) {
    if (balance[v] == 0) continue;
    if (balance[v] < 0 && pn < 0) {
      pn = v;
      res.q = static_cast<int>(-balance[v]);
    } else if (balance[v] > 0 && nn < 0) {
      nn = v;
    } else {
      throw DecomposeError("boundary is not of the form Q([[N]] - [[P]])");
    }
  }
  if ((pn < 0) != (nn < 0) || (pn >= 0 && balance[nn] != res.q))
    throw DecomposeError("boundary is not of the form Q([[N]] - [[P]])");
  if (pn >= 0) {
    res.p = index.point(pn);
    res.n = index.point(nn);
  }

  std::vector<std::size_t> next(nodes, 0);  // cursor into out[v]
  std::vector<bool> used(edges.size(), false);
  auto take = [&](int v) -> int {
    auto& c = next[v];
    while (c < out[v].size() && used[out[v][c]]) ++c;
    if (c == out[v].size()) return -1;
    const int e = out[v][c];
    used[e] = true;
    return e;
  };

  // Walks from `start` until `stop` is reached (or, for cycles, until the
  // walk closes); revisits split off simple cycles.
  auto walk = [&](int start, int stop) {
    std::vector<int> path_edges;
    std::vector<int> path_nodes{start};
    std::map<int, std::size_t> pos{{start, 0}};
    int v = start;
    while (true) {
      if (stop >= 0 && v == stop) break;
      const int e = take(v);
      if (e < 0) {
        if (stop >= 0) throw DecomposeError("path peeling got stuck");
        break;
      }
      const int w = edges[e].to;
      path_edges.push_back(e);
      if (auto it = pos.find(w); it != pos.end()) {
        const std::size_t k = it->second;
        std::vector<int> cyc(path_edges.begin() + static_cast<std::ptrdiff_t>(k), path_edges.end());
        res.cycles.push_back(detail::make_piece(edges, cyc, true));
        path_edges.resize(k);
        for (std::size_t i = k + 1; i < path_nodes.size(); ++i) pos.erase(path_nodes[i]);
        path_nodes.resize(k + 1);
        v = w;
        continue;
      }
      pos[w] = path_nodes.size();
      path_nodes.push_back(w);
      v = w;
    }
    return path_edges;
  };

  for (int i = 0; i < res.q; ++i) res.paths.push_back(detail::make_piece(edges, walk(pn, nn), false));
  for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
    if (used[e]) continue;
    const auto rest = walk(edges[e].from, -1);
    if (!rest.empty()) throw DecomposeError("unbalanced remainder after peeling paths");
  }
  return res;
}

// ---------------------------------------------------------------------------
// Flat distance between spherical chains, bounded above.

namespace detail {

inline std::vector<Point> piece_points(const Piece& p) {
  std::vector<Point> pts;
  for (const auto& a : p.chain.arcs) {
    if (pts.empty()) pts.push_back(a.arc.from);
    pts.push_back(a.arc.to);
  }
  return pts;
}

inline std::vector<double> arclength(const std::vector<Point>& pts) {
  std::vector<double> s(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) s[i] = s[i - 1] + (pts[i] - pts[i - 1]).norm();
  const double total = s.back() > 0 ? s.back() : 1.0;
  for (double& x : s) x /= total;
  return s;
}

// Triangulated strip between two polylines traversed in parallel.
inline void zipper(ComplexBuilder& cb, const std::vector<int>& a, const std::vector<double>& sa, const std::vector<int>& b,
                   const std::vector<double>& sb) {
  std::size_t i = 0, j = 0;
  while (i + 1 < a.size() || j + 1 < b.size()) {
    const bool adv_a = j + 1 >= b.size() || (i + 1 < a.size() && sa[i + 1] <= sb[j + 1]);
    if (adv_a) {
      cb.add_simplex({a[i], b[j], a[i + 1]});
      ++i;
    } else {
      cb.add_simplex({a[i], b[j], b[j + 1]});
      ++j;
    }
  }
}

inline double segment_area_between_arcs_and_chords(const SphericalChain& z) {
  double s = 0.0;
  for (const auto& a : z.arcs) s += static_cast<double>(std::llabs(a.coefficient())) * 0.5 * (a.arc.angle - std::sin(a.arc.angle));
  return s;
}

// Rotates a closed polyline (first == last) to start at index k.
inline std::vector<Point> rotate_cycle(const std::vector<Point>& pts, std::size_t k) {
  std::vector<Point> out;
  const std::size_t m = pts.size() - 1;
  for (std::size_t i = 0; i <= m; ++i) out.push_back(pts[(k + i) % m]);
  return out;
}

}  // namespace detail

struct SphericalFlatResult {
  double value = 0.0;  // upper bound on the ambient flat distance
  double lp_value = 0.0;
  double chord_correction = 0.0;
};

/// Upper bound for F(A - B) for spherical chains with the same boundary:
/// pieces of A and B are paired (paths with paths, cycles with cycles, by
/// Hausdorff distance), strips are triangulated between paired pieces and
/// every cycle also gets a fan to its projected centroid. The flat-norm LP on
/// that complex bounds the distance between the chord chains; the exact
/// areas between arcs and chords are added.
inline SphericalFlatResult spherical_flat_upper(const SphericalChain& a, const SphericalChain& b) {
  SphericalFlatResult res;
  if (a.empty() && b.empty()) return res;
  const int dim = a.empty() ? b.ambient_dim() : a.ambient_dim();
  const PieceDecomposition da = indecomposable_pieces(a), db = indecomposable_pieces(b);
  if (da.q != db.q || (da.q > 0 && ((da.p - db.p).norm() > 1e-9 || (da.n - db.n).norm() > 1e-9)))
    throw DecomposeError("spherical chains have different boundaries");

  ComplexBuilder cb(dim);
  std::vector<std::pair<std::array<int, 2>, long long>> edges_a, edges_b;
  auto add_polyline = [&](const std::vector<Point>& pts, auto& edges) {
    std::vector<int> ids;
    for (const auto& p : pts) ids.push_back(cb.add_vertex(p));
    for (std::size_t i = 0; i + 1 < ids.size(); ++i)
      if (cb.add_simplex({ids[i], ids[i + 1]})) edges.push_back({{ids[i], ids[i + 1]}, 1});
    return ids;
  };
  auto fan = [&](const std::vector<int>& ids, const std::vector<Point>& pts) {
    Point c = Point::Zero(dim);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) c += pts[i];
    if (c.norm() < 1e-9) return;
    const int apex = cb.add_vertex(c.normalized());
    for (std::size_t i = 0; i + 1 < ids.size(); ++i) cb.add_simplex({apex, ids[i], ids[i + 1]});
  };

  // Greedy pairing by Hausdorff distance.
  auto pair_up = [](const std::vector<Piece>& x, const std::vector<Piece>& y) {
    std::vector<std::tuple<double, std::size_t, std::size_t>> cand;
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t j = 0; j < y.size(); ++j) cand.emplace_back(hausdorff_distance(x[i].chain, y[j].chain, 0.02), i, j);
    std::sort(cand.begin(), cand.end());
    std::vector<bool> ux(x.size()), uy(y.size());
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const auto& [dist, i, j] : cand)
      if (!ux[i] && !uy[j]) {
        ux[i] = uy[j] = true;
        out.emplace_back(i, j);
      }
    return out;
  };

  for (const auto& [i, j] : pair_up(da.paths, db.paths)) {
    const auto pa = detail::piece_points(da.paths[i]), pb = detail::piece_points(db.paths[j]);
    const auto ia = add_polyline(pa, edges_a), ib = add_polyline(pb, edges_b);
    detail::zipper(cb, ia, detail::arclength(pa), ib, detail::arclength(pb));
  }
  std::vector<bool> ca(da.cycles.size()), cbused(db.cycles.size());
  for (const auto& [i, j] : pair_up(da.cycles, db.cycles)) {
    ca[i] = cbused[j] = true;
    auto pa = detail::piece_points(da.cycles[i]);
    const auto pb = detail::piece_points(db.cycles[j]);
    std::size_t k = 0;
    for (std::size_t t = 1; t + 1 < pa.size(); ++t)
      if ((pa[t] - pb[0]).norm() < (pa[k] - pb[0]).norm()) k = t;
    pa = detail::rotate_cycle(pa, k);
    const auto ia = add_polyline(pa, edges_a), ib = add_polyline(pb, edges_b);
    detail::zipper(cb, ia, detail::arclength(pa), ib, detail::arclength(pb));
    fan(ia, pa);
    fan(ib, pb);
  }
  for (std::size_t i = 0; i < da.cycles.size(); ++i)
    if (!ca[i]) {
      const auto pa = detail::piece_points(da.cycles[i]);
      fan(add_polyline(pa, edges_a), pa);
    }
  for (std::size_t j = 0; j < db.cycles.size(); ++j)
    if (!cbused[j]) {
      const auto pb = detail::piece_points(db.cycles[j]);
      fan(add_polyline(pb, edges_b), pb);
    }

  auto cx = std::make_shared<const SimplicialComplex>(cb.build());
  Chain ta(cx, 1), tb(cx, 1);
  for (const auto& [e, c] : edges_a) ta.add_oriented(e, c);
  for (const auto& [e, c] : edges_b) tb.add_oriented(e, c);
  if (ta == tb) {
    res.lp_value = 0.0;
  } else if (cx->num_simplices(2) == 0) {
    res.lp_value = mass(ta - tb);
  } else {
    res.lp_value = flat_distance(ta, tb, 10.0).value;
  }
  res.chord_correction = detail::segment_area_between_arcs_and_chords(a) + detail::segment_area_between_arcs_and_chords(b);
  res.value = res.lp_value + (ta == tb ? 0.0 : res.chord_correction);
  return res;
}

// ---------------------------------------------------------------------------
// Grouping along the sheets of a cone.

struct ConditionRow {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct DecompositionResult {
  bool success = false;
  std::string failure;
  std::vector<SphericalChain> z;       // Z_1..Z_Q, then Z_{Q+1}
  std::vector<SphericalChain> r;       // R_1..R_Q
  std::vector<double> sub_cone_mass;   // ||S_i||(B_1) = ||R_i|| / 2
  std::vector<ConditionRow> conditions;
  double epsilon_used = 0.0;
  int q = 0;
  SphericalChain offending_cycle;

  bool all_pass() const {
    return success && std::all_of(conditions.begin(), conditions.end(), [](const ConditionRow& c) { return c.pass; });
  }
};

struct DecomposeOptions {
  double eta = -1.0;         // default 5 eps0
  double mass_floor = -1.0;  // default eps0 / 2
  double hausdorff_h = 0.01;
};

namespace detail {

inline double one_sided_distance(const SphericalChain& from, const SphericalChain& to, double h) {
  return directed_hausdorff(sample_support(from, h), sample_support(to, h));
}

inline bool same_chain(const SphericalChain& a, const SphericalChain& b) {
  SpherePointIndex index;
  SphericalChain d = a;
  for (const auto& arc : b.arcs) d.add(arc.arc, arc.multiplicity, -arc.orientation);
  return arc_multiplicities(d, index).empty();
}

inline bool same_boundary(const SphericalChain& a, const SphericalChain& b) {
  SphericalChain d = a;
  for (const auto& arc : b.arcs) d.add(arc.arc, arc.multiplicity, -arc.orientation);
  return spherical_boundary(d).empty();
}

}  // namespace detail

/// Groups the pieces of Z along the pieces of the cross-section R: paths are
/// matched to the paths of R by optimal Hausdorff assignment; cycles go to
/// Z_{Q+1} when light, otherwise to the closest R_i within eta. R_1 carries
/// all cycles of R.
inline DecompositionResult lemma_decomposition(const SphericalChain& z, const SphericalChain& r, double eps0,
                                               DecomposeOptions opt = {}) {
  if (!(eps0 > 0.0)) throw DecomposeError("eps0 must be positive");
  if (opt.eta < 0) opt.eta = 5.0 * eps0;
  if (opt.mass_floor < 0) opt.mass_floor = eps0 / 2.0;
  DecompositionResult res;
  res.epsilon_used = eps0;
  const PieceDecomposition dz = indecomposable_pieces(z), dr = indecomposable_pieces(r);
  if (dz.q != dr.q || (dr.q > 0 && ((dz.p - dr.p).norm() > 1e-9 || (dz.n - dr.n).norm() > 1e-9))) {
    res.failure = "boundary of Z differs from boundary of R";
    return res;
  }
  const int q = dr.q;
  res.q = q;
  if (q < 1) {
    res.failure = "cross-section has no boundary (Q = 0)";
    return res;
  }
  if (q > 6) throw DecomposeError("Q > 6 is beyond the exhaustive assignment");

  res.r.resize(q);
  for (int i = 0; i < q; ++i) res.r[i] = dr.paths[i].chain;
  for (const auto& c : dr.cycles) res.r[0].append(c.chain);

  // Optimal assignment of Z paths to R pieces.
  std::vector<std::vector<double>> cost(q, std::vector<double>(q));
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) cost[i][j] = hausdorff_distance(dz.paths[i].chain, res.r[j], opt.hausdorff_h);
  std::vector<int> perm(q), best;
  std::iota(perm.begin(), perm.end(), 0);
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (int i = 0; i < q; ++i) c += cost[i][perm[i]];
    if (c < best_cost - 1e-15) {
      best_cost = c;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  res.z.assign(q + 1, SphericalChain{});
  for (int i = 0; i < q; ++i) res.z[best[i]] = dz.paths[i].chain;

  for (const auto& c : dz.cycles) {
    if (c.mass() <= opt.mass_floor) {
      res.z[q].append(c.chain);
      continue;
    }
    int target = -1;
    double dist = std::numeric_limits<double>::infinity();
    for (int i = 0; i < q; ++i) {
      const double dd = detail::one_sided_distance(c.chain, res.r[i], opt.hausdorff_h);
      if (dd < dist) {
        dist = dd;
        target = i;
      }
    }
    if (dist > opt.eta) {
      std::ostringstream msg;
      msg << "unmatchable cycle of mass " << c.mass() << " at distance " << dist << " > eta = " << opt.eta;
      res.failure = msg.str();
      res.offending_cycle = c.chain;
      return res;
    }
    res.z[target].append(c.chain);
  }
  res.success = true;
  for (const auto& ri : res.r) res.sub_cone_mass.push_back(ri.mass() / 2.0);

  auto row = [&](std::string name, double value, double threshold) {
    res.conditions.push_back({std::move(name), value, threshold, value <= threshold});
  };
  // (i) Z = sum Z_i, as integer chains.
  SphericalChain sum;
  for (const auto& zi : res.z) sum.append(zi);
  row("(i) Z = sum Z_i", detail::same_chain(sum, z) ? 0.0 : 1.0, 0.0);
  // (ii) mass additivity for the cones and for Z.
  double s_parts = 0.0, z_parts = 0.0;
  for (double m : res.sub_cone_mass) s_parts += m;
  for (const auto& zi : res.z) z_parts += zi.mass();
  SpherePointIndex idx_r, idx_z;
  const double s_mass = canonicalize(r, idx_r).mass() / 2.0;
  const double z_mass = canonicalize(z, idx_z).mass();
  row("(ii) mass additivity", std::max(std::abs(s_mass - s_parts), std::abs(z_mass - z_parts)), 1e-12);
  double worst_bd = 0.0, worst_flat = 0.0, worst_gap = -std::numeric_limits<double>::infinity(), worst_dist = 0.0;
  for (int i = 0; i < q; ++i) {
    if (!detail::same_boundary(res.z[i], res.r[i])) worst_bd = 1.0;
    worst_flat = std::max(worst_flat, spherical_flat_upper(res.z[i], res.r[i]).value);
    worst_gap = std::max(worst_gap, res.z[i].mass() - res.r[i].mass());
    worst_dist = std::max(worst_dist, hausdorff_distance(res.z[i], res.r[i], opt.hausdorff_h));
  }
  row("(iii) dZ_i = dR_i", worst_bd, 0.0);
  row("(iv) F(Z_i - R_i)", worst_flat, eps0);
  row("(v) M(Z_i) - M(R_i)", worst_gap, eps0);
  row("(vi) dist(spt Z_i, spt R_i)", worst_dist, eps0);
  const double bd_rem = spherical_boundary(res.z[q]).empty() ? 0.0 : 1.0;
  row("(vii) dZ_{Q+1} = 0, M(Z_{Q+1})", bd_rem > 0 ? std::numeric_limits<double>::infinity() : res.z[q].mass(), eps0);
  return res;
}

struct MassSplittingReport {
  double cone_mass = 0.0;               // ||S||(B_1) computed from the ConeSpec
  std::vector<double> sub_cone_masses;  // ||S_i||(B_1)
  std::vector<double> piece_masses;     // sector masses of the indecomposable pieces of R
  std::vector<long long> sub_cone_boundary;  // multiplicity of l in dS_i
  double defect = 0.0;
  bool pass = false;
};

/// Checks ||S||(B_1) = sum ||S_i||(B_1) with exact sector masses and that
/// every S_i has boundary [[l]].
inline MassSplittingReport verify_mass_splitting(const DecompositionResult& result, const ConeSpec& s) {
  MassSplittingReport rep;
  rep.cone_mass = cone_exact_mass(s);
  double sum = 0.0;
  for (const auto& ri : result.r) {
    const double m = ri.mass() / 2.0;
    rep.sub_cone_masses.push_back(m);
    sum += m;
    const auto bd = spherical_boundary(ri);
    long long mult = 0;
    for (const auto& [pt, c] : bd)
      if ((pt + s.line).norm() < 1e-9) mult = c;  // coefficient at N = -l
    rep.sub_cone_boundary.push_back(bd.size() == 2 ? mult : 0);
  }
  SphericalChain all;
  for (const auto& ri : result.r) all.append(ri);
  if (!all.empty()) {
    const PieceDecomposition d = indecomposable_pieces(all);
    for (const auto& p : d.paths) rep.piece_masses.push_back(p.mass() / 2.0);
    for (const auto& c : d.cycles) rep.piece_masses.push_back(c.mass() / 2.0);
  }
  rep.defect = std::abs(rep.cone_mass - sum);
  rep.pass = result.success && rep.defect <= 1e-12 &&
             std::all_of(rep.sub_cone_boundary.begin(), rep.sub_cone_boundary.end(), [](long long m) { return m == 1; });
  return rep;
}

}  // namespace conelab
