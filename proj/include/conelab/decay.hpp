#pragma once

// Excess decay and convergence of blow-ups to a tangent cone, measured
// against a finite family of candidate cones.

#include "conelab/monotone.hpp"

namespace conelab {

struct LogLogFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double constant = std::numeric_limits<double>::quiet_NaN();  // value ~ constant * rho^slope
  double residual = std::numeric_limits<double>::quiet_NaN();  // RMS in log space
  int points = 0;
  bool vanishing = false;  // fewer than three values above the floor
};

/// Least squares of log|value| against log(rho). The largest radius is
/// dropped by default.
inline LogLogFit loglog_fit(const std::vector<double>& radii, const std::vector<double>& values,
                            bool exclude_largest = true, double floor = 1e-12) {
  if (radii.size() != values.size()) throw MonotoneError("loglog_fit: size mismatch");
  std::size_t skip = radii.size();
  if (exclude_largest && !radii.empty()) skip = std::max_element(radii.begin(), radii.end()) - radii.begin();
  std::vector<double> x, y;
  for (std::size_t i = 0; i < radii.size(); ++i)
    if (i != skip && std::abs(values[i]) > floor) {
      x.push_back(std::log(radii[i]));
      y.push_back(std::log(std::abs(values[i])));
    }
  LogLogFit fit;
  fit.points = static_cast<int>(x.size());
  if (x.size() < 3) {
    fit.vanishing = true;
    return fit;
  }
  const auto pf = detail::fit_power(x, y, 1.0);
  fit.slope = pf.b;
  fit.constant = std::exp(pf.a);
  fit.residual = std::sqrt(pf.rss / static_cast<double>(x.size()));
  return fit;
}

// ---------------------------------------------------------------------------
// Candidate cones as flat sheets.

struct CandidateSheet {
  Point e1, e2;  // half sheets: e1 = l, e2 = v
  bool half = true;
  long long mult = 1;
};

inline std::vector<CandidateSheet> candidate_sheets(const ConeSpec& s) {
  std::vector<CandidateSheet> out;
  for (const auto& hp : s.halfplanes) out.push_back({s.line, hp.v, true, hp.mult});
  for (const auto& pl : s.interior_planes) out.push_back({pl.a, pl.b, false, pl.mult});
  return out;
}

namespace detail {

inline Point project_to_sheet(const Point& x, const CandidateSheet& s) {
  return x.dot(s.e1) * s.e1 + (s.half ? std::max(0.0, x.dot(s.e2)) : x.dot(s.e2)) * s.e2;
}

/// Distance from x to the sheet intersected with the closed unit ball.
inline double distance_to_sheet_in_ball(const Point& x, const CandidateSheet& s) {
  Eigen::Vector2d q(x.dot(s.e1), x.dot(s.e2));
  const double off2 = std::max(0.0, x.squaredNorm() - q.squaredNorm());
  if (s.half && q.y() < 0.0) q = Eigen::Vector2d(std::clamp(q.x(), -1.0, 1.0), 0.0);
  else if (q.norm() > 1.0) q.normalize();
  const Eigen::Vector2d x2(x.dot(s.e1), x.dot(s.e2));
  return std::sqrt(off2 + (x2 - q).squaredNorm());
}

inline double distance_to_cone_in_ball(const Point& x, const std::vector<CandidateSheet>& sheets) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : sheets) best = std::min(best, distance_to_sheet_in_ball(x, s));
  return best;
}

inline double triangle_area(const Point& a, const Point& b, const Point& c) {
  const Point u = b - a, v = c - a;
  return 0.5 * std::sqrt(std::max(0.0, u.squaredNorm() * v.squaredNorm() - std::pow(u.dot(v), 2)));
}

}  // namespace detail

/// Upper bound for the flat distance in B_1 between the blow-up of `t` at
/// scale rho and the cone: each sheet is pushed onto its nearest candidate
/// sheet along straight segments, and the swept prism volumes and boundary
/// strips inside B_1 are added up. Multiplicity left unmatched on a
/// candidate sheet is charged its full mass in B_1.
inline double homotopy_flat_bound(const Surface& t, const Blowup& b, const ConeSpec& cand, double h, double cover,
                                  int clip_depth = 3) {
  const auto sheets = candidate_sheets(cand);
  const Point zero = Point::Zero(t.ambient_dim);
  std::vector<long long> assigned(sheets.size(), 0);
  double total = 0.0;
  SheetMeshOptions mo;
  mo.graded = false;
  mo.h = h;
  for (const auto& sh : t.sheets) {
    const ParamMesh m = sheet_param_mesh(sh.half, blowup_param_radius(sh, b.rho, cover), mo);
    const auto f = sheet_vertices(sh, m, b, t.ambient_dim);
    // Nearest candidate sheet, judged on the vertices inside B_1.
    std::size_t k_best = 0;
    double d_best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < sheets.size(); ++k) {
      double d = 0.0;
      for (const auto& x : f)
        if (x.norm() <= 1.0) d += (x - detail::project_to_sheet(x, sheets[k])).norm();
      if (d < d_best) d_best = d, k_best = k;
    }
    const auto& target = sheets[k_best];
    std::vector<Point> g;
    g.reserve(f.size());
    for (const auto& x : f) g.push_back(detail::project_to_sheet(x, target));
    // Orientation of the projected sheet relative to the candidate's frame.
    double signed_area = 0.0;
    for (const auto& tri : m.triangles) {
      const Point& a = g[tri[0]];
      if (a.norm() > 1.0) continue;
      const Point u = g[tri[1]] - a, v = g[tri[2]] - a;
      signed_area += u.dot(target.e1) * v.dot(target.e2) - u.dot(target.e2) * v.dot(target.e1);
    }
    assigned[k_best] += (signed_area >= 0.0 ? 1 : -1) * sh.mult;

    double sweep = 0.0;
    for (auto tri : m.triangles) {
      std::sort(tri.begin(), tri.end());
      const auto [i, j, k] = tri;
      double near = std::numeric_limits<double>::infinity(), diam = 0.0;
      for (const Point* x : std::initializer_list<const Point*>{&f[i], &f[j], &f[k], &g[i], &g[j], &g[k]}) near = std::min(near, x->norm());
      for (int v : tri) diam = std::max({diam, (f[v] - g[v]).norm(), (f[v] - f[i]).norm(), (f[v] - f[j]).norm()});
      if (near - 3.0 * diam > 1.0) continue;
      sweep += detail::clip_tet(f[i], f[j], f[k], g[k], zero, 1.0, clip_depth);
      sweep += detail::clip_tet(f[i], f[j], g[j], g[k], zero, 1.0, clip_depth);
      sweep += detail::clip_tet(f[i], g[i], g[j], g[k], zero, 1.0, clip_depth);
    }
    auto strip = [&](int i, int j) {
      return detail::clip_triangle(f[i], f[j], g[j], zero, 1.0) + detail::clip_triangle(f[i], g[j], g[i], zero, 1.0);
    };
    for (std::size_t q = 0; q + 1 < m.axis.size(); ++q) sweep += strip(m.axis[q], m.axis[q + 1]);
    for (std::size_t q = 0; q + 1 < m.rim.size(); ++q) sweep += strip(m.rim[q], m.rim[q + 1]);
    if (!sh.half && m.rim.size() > 1) sweep += strip(m.rim.back(), m.rim.front());
    total += static_cast<double>(std::llabs(sh.mult)) * sweep;
  }
  for (std::size_t k = 0; k < sheets.size(); ++k) {
    const double sheet_mass = sheets[k].half ? std::numbers::pi / 2.0 : std::numbers::pi;
    total += static_cast<double>(std::llabs(sheets[k].mult - assigned[k])) * sheet_mass;
  }
  return total;
}

/// Hausdorff distance between spt(T_{p,rho}) and spt(S), both cut to the
/// closed unit ball. Points of T are tested against the exact cone; points
/// of S on a polar grid are tested against the triangles of T.
inline double hausdorff_to_cone(const Chain& blown, const ConeSpec& cand, double h) {
  const auto sheets = candidate_sheets(cand);
  const int dim = blown.complex().ambient_dim();
  const auto pts = sample_support(blown, h, Ball{Point::Zero(dim), 1.0});
  if (pts.empty()) throw MonotoneError("blow-up has no support in the unit ball");
  double worst = 0.0;
  for (const auto& x : pts) worst = std::max(worst, detail::distance_to_cone_in_ball(x, sheets));

  const auto& cx = blown.complex();
  std::vector<std::array<Point, 3>> tris;
  for (const auto& [id, coef] : blown.coeffs()) {
    const auto q = cx.points(2, id);
    if (std::min({q[0].norm(), q[1].norm(), q[2].norm()}) <= 1.0 + worst + 4.0 * h) tris.push_back({q[0], q[1], q[2]});
  }
  std::vector<Point> cone_pts;
  const int rings = std::max(1, static_cast<int>(std::ceil(1.0 / h)));
  for (const auto& s : sheets) {
    cone_pts.push_back(Point::Zero(dim));
    for (int i = 1; i <= rings; ++i) {
      const double r = static_cast<double>(i) / rings;
      const double span = s.half ? std::numbers::pi : 2.0 * std::numbers::pi;
      const int seg = std::max(2, static_cast<int>(std::ceil(span * r / h)));
      for (int j = 0; j <= seg; ++j) {
        if (!s.half && j == seg) break;
        const double th = span * j / seg;
        cone_pts.push_back(r * (std::cos(th) * s.e1 + std::sin(th) * s.e2));
      }
    }
  }
  for (const auto& y : cone_pts) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& tr : tris) {
      best = std::min(best, detail::point_triangle_distance(y, tr[0], tr[1], tr[2]));
      if (best <= worst) break;
    }
    worst = std::max(worst, best);
  }
  return worst;
}

/// Half-planes H(l, cos(a) v + sin(a) w) for each angle.
inline std::vector<ConeSpec> rotated_half_planes(const Point& l, const Point& v, const Point& w,
                                                 const std::vector<double>& angles) {
  std::vector<ConeSpec> out;
  for (double a : angles) {
    ConeSpec s;
    s.n = static_cast<int>(l.size()) - 2;
    s.line = l;
    s.halfplanes.push_back({std::cos(a) * v + std::sin(a) * w, 1});
    s.case_tag = ConeCase::OpenBook;
    out.push_back(s);
  }
  return out;
}

/// The same cone rotated about its line in the (v, w) plane, where v is the
/// first page direction.
inline std::vector<ConeSpec> rotated_cones(const ConeSpec& base, const Point& w, const std::vector<double>& angles) {
  if (base.halfplanes.empty()) throw MonotoneError("rotated_cones needs a cone with pages");
  const Point v = base.halfplanes.front().v;
  const Point wn = (w - w.dot(v) * v - w.dot(base.line) * base.line).normalized();
  std::vector<ConeSpec> out;
  for (double a : angles) {
    const double c = std::cos(a), s = std::sin(a);
    auto rot = [&](const Point& x) -> Point {
      const double xv = x.dot(v), xw = x.dot(wn);
      return x + (c * xv - s * xw - xv) * v + (s * xv + c * xw - xw) * wn;
    };
    ConeSpec r = base;
    for (auto& hp : r.halfplanes) hp.v = rot(hp.v);
    for (auto& pl : r.interior_planes) pl.a = rot(pl.a), pl.b = rot(pl.b);
    out.push_back(r);
  }
  return out;
}

struct DecayOptions {
  SheetMeshOptions excess_mesh;
  double blowup_h = 0.05;
  double cover = 1.5;  // covers B_1 after projection for candidate tilts up to about 45 degrees
  double hausdorff_h = 0.04;
  double max_initial_distance = 0.5;
  int uniqueness_count = 4;
  int min_radii = 6;
};

struct DecayReport {
  std::vector<double> radii;  // strictly decreasing
  double theta0 = 0.0;
  std::vector<double> excess, flat, hausdorff;
  std::vector<std::vector<double>> candidate_flat;  // [radius][candidate]
  std::vector<int> best;                             // argmin candidate per radius
  LogLogFit excess_fit, flat_fit, hausdorff_fit;
  int limit_cone = -1;
  bool unique = false;
};

inline DecayReport decay_experiment(const Surface& t, const Point& p, double theta0,
                                    const std::vector<ConeSpec>& candidates, std::vector<double> radii,
                                    const DecayOptions& opt = {}) {
  if (candidates.empty()) throw MonotoneError("decay: no candidate cones");
  if (static_cast<int>(radii.size()) < opt.min_radii) throw MonotoneError("decay: need at least six radii");
  std::sort(radii.begin(), radii.end(), std::greater<>());
  for (std::size_t i = 0; i + 1 < radii.size(); ++i)
    if (!(radii[i + 1] < radii[i])) throw MonotoneError("decay: radii must be distinct");
  const Point c = origin_or(p, t.ambient_dim);
  DecayReport rep;
  rep.radii = radii;
  rep.theta0 = theta0;

  const Chain whole = surface_chain(t, opt.excess_mesh, Blowup{c, 1.0}, std::numeric_limits<double>::infinity());
  rep.excess = mass_ratios(whole, Point::Zero(t.ambient_dim), radii);
  for (double& e : rep.excess) e -= theta0;

  const std::size_t nc = candidates.size();
  const auto flat = parallel_map(radii.size() * nc, [&](std::size_t q) {
    return homotopy_flat_bound(t, Blowup{c, radii[q / nc]}, candidates[q % nc], opt.blowup_h, opt.cover);
  });
  for (std::size_t i = 0; i < radii.size(); ++i) {
    rep.candidate_flat.emplace_back(flat.begin() + i * nc, flat.begin() + (i + 1) * nc);
    const auto& row = rep.candidate_flat.back();
    const int k = static_cast<int>(std::min_element(row.begin(), row.end()) - row.begin());
    rep.best.push_back(k);
    rep.flat.push_back(row[k]);
  }
  if (rep.flat.back() > opt.max_initial_distance) throw MonotoneError("decay: no candidate cone within flat distance");

  SheetMeshOptions hm;
  hm.graded = false;
  hm.h = opt.blowup_h;
  rep.hausdorff = parallel_map(radii.size(), [&](std::size_t i) {
    const Chain blown = surface_chain(t, hm, Blowup{c, radii[i]}, opt.cover);
    return hausdorff_to_cone(blown, candidates[rep.best[i]], opt.hausdorff_h);
  });

  rep.excess_fit = loglog_fit(radii, rep.excess);
  rep.flat_fit = loglog_fit(radii, rep.flat);
  rep.hausdorff_fit = loglog_fit(radii, rep.hausdorff);
  const int u = std::min<int>(opt.uniqueness_count, static_cast<int>(radii.size()));
  rep.limit_cone = rep.best.back();
  rep.unique = std::all_of(rep.best.end() - u, rep.best.end(), [&](int k) { return k == rep.limit_cone; });
  return rep;
}

}  // namespace conelab
