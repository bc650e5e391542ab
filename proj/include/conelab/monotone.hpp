#pragma once

// Density ratios, spherical excess and the almost-monotonicity identity for
// polyhedral 2-currents.

#include "conelab/currents.hpp"
#include "conelab/parallel.hpp"
#include "conelab/surface.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace conelab {

struct MonotoneError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AlmostMinParams {
  double lambda = 0.0;
  double r0 = 1.0;
  double alpha0 = 1.0;
  double c2 = 10.0;

  void validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw MonotoneError("Lambda must be finite and >= 0");
    if (!(r0 > 0.0 && r0 <= 1.0)) throw MonotoneError("r0 must lie in (0, 1]");
    if (!(alpha0 > 0.0) || !std::isfinite(alpha0)) throw MonotoneError("alpha0 must be positive");
    if (!(c2 > 0.0) || !std::isfinite(c2)) throw MonotoneError("C2 must be positive");
  }
};

/// r0, r0*ratio, ..., count entries.
inline std::vector<double> geometric_radii(double r0, double ratio, int count) {
  if (!(r0 > 0.0) || !(ratio > 0.0) || ratio == 1.0 || count < 1) throw MonotoneError("bad radius grid");
  std::vector<double> r;
  for (int i = 0; i < count; ++i) r.push_back(r0 * std::pow(ratio, i));
  return r;
}

inline Point origin_or(const Point& p, int dim) { return p.size() ? p : Point::Zero(dim); }

inline double mass_ratio(const Chain& t, const Point& p, double r) {
  return mass(t, Ball{origin_or(p, t.complex().ambient_dim()), r}) / (std::numbers::pi * r * r);
}

inline std::vector<double> mass_ratios(const Chain& t, const Point& p, const std::vector<double>& radii) {
  return parallel_map(radii.size(), [&](std::size_t i) { return mass_ratio(t, p, radii[i]); });
}

inline double spherical_excess(const Chain& t, const Point& p, double r, double theta0) {
  if (!(r > 0.0)) throw MonotoneError("radius must be positive");
  return mass_ratio(t, p, r) - theta0;
}

// ---------------------------------------------------------------------------
// Density by extrapolation.

struct DensityEstimate {
  double theta = 0.0;
  double b = 0.0;
  double gamma = 2.0;
  double residual = 0.0;          // RMS misfit over the fitted radii
  double prediction_error = 0.0;  // misfit at the next radius up, if any
  std::vector<double> radii;      // ascending, usable only
  std::vector<double> ratios;
};

struct DensityOptions {
  double residual_tol = 1e-3;
  double gamma_min = 0.5;
  double gamma_max = 2.0;
};

namespace detail {

struct PowerFit {
  double a, b, rss;
};

inline PowerFit fit_power(const std::vector<double>& r, const std::vector<double>& y, double gamma) {
  // Least squares for y = a + b r^gamma.
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double x = std::pow(r[i], gamma);
    n += 1;
    sx += x;
    sy += y[i];
    sxx += x * x;
    sxy += x * y[i];
  }
  const double den = n * sxx - sx * sx;
  const double b = den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
  const double a = (sy - b * sx) / n;
  double rss = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) rss += std::pow(y[i] - a - b * std::pow(r[i], gamma), 2);
  return {a, b, rss};
}

}  // namespace detail

inline DensityEstimate density(const Chain& t, const Point& p, std::vector<double> radii,
                               const DensityOptions& opt = {}) {
  std::sort(radii.begin(), radii.end());
  const auto all = mass_ratios(t, p, radii);
  DensityEstimate est;
  for (std::size_t i = 0; i < radii.size(); ++i)
    if (all[i] > 0.0) {
      est.radii.push_back(radii[i]);
      est.ratios.push_back(all[i]);
    }
  if (est.radii.size() < 3) throw MonotoneError("density: need three radii with mass near p");
  const std::vector<double> r(est.radii.begin(), est.radii.begin() + 3);
  const std::vector<double> y(est.ratios.begin(), est.ratios.begin() + 3);
  const double spread = *std::max_element(y.begin(), y.end()) - *std::min_element(y.begin(), y.end());
  if (spread < 1e-12) {
    est.theta = (y[0] + y[1] + y[2]) / 3.0;
    est.b = 0.0;
    est.residual = spread;
  } else {
    // The RSS is not unimodal in gamma in general, so scan then refine.
    const int steps = 150;
    double best_g = opt.gamma_min;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= steps; ++i) {
      const double g = opt.gamma_min + (opt.gamma_max - opt.gamma_min) * i / steps;
      const double rss = detail::fit_power(r, y, g).rss;
      if (rss < best) best = rss, best_g = g;
    }
    double lo = std::max(opt.gamma_min, best_g - (opt.gamma_max - opt.gamma_min) / steps);
    double hi = std::min(opt.gamma_max, best_g + (opt.gamma_max - opt.gamma_min) / steps);
    for (int it = 0; it < 60; ++it) {
      const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
      if (detail::fit_power(r, y, m1).rss < detail::fit_power(r, y, m2).rss)
        hi = m2;
      else
        lo = m1;
    }
    est.gamma = 0.5 * (lo + hi);
    const auto f = detail::fit_power(r, y, est.gamma);
    est.theta = f.a;
    est.b = f.b;
    est.residual = std::sqrt(f.rss / 3.0);
  }
  if (est.radii.size() > 3)
    est.prediction_error = std::abs(est.theta + est.b * std::pow(est.radii[3], est.gamma) - est.ratios[3]);
  if (est.residual > opt.residual_tol) throw MonotoneError("density: extrapolation did not converge");
  return est;
}

// ---------------------------------------------------------------------------
// Almost-monotonicity.

namespace detail {

/// Distance from x to the triangle abc in any dimension.
inline double point_triangle_distance(const Point& x, const Point& a, const Point& b, const Point& c) {
  const Point e1 = b - a, e2 = c - a, f = x - a;
  const double g11 = e1.squaredNorm(), g12 = e1.dot(e2), g22 = e2.squaredNorm();
  const double det = g11 * g22 - g12 * g12;
  if (det > 0.0) {
    const double r1 = e1.dot(f), r2 = e2.dot(f);
    const double s = (g22 * r1 - g12 * r2) / det, t = (g11 * r2 - g12 * r1) / det;
    if (s >= 0.0 && t >= 0.0 && s + t <= 1.0) return (f - s * e1 - t * e2).norm();
  }
  auto seg = [&](const Point& p, const Point& q) {
    const Point d = q - p;
    const double l2 = d.squaredNorm();
    const double u = l2 > 0.0 ? std::clamp((x - p).dot(d) / l2, 0.0, 1.0) : 0.0;
    return (x - p - u * d).norm();
  };
  return std::min({seg(a, b), seg(b, c), seg(c, a)});
}

/// Component of z orthogonal to the plane spanned by e1, e2.
inline Point normal_part(const Point& z, const Point& e1, const Point& e2) {
  const double g11 = e1.squaredNorm(), g12 = e1.dot(e2), g22 = e2.squaredNorm();
  const double det = g11 * g22 - g12 * g12;
  const double r1 = e1.dot(z), r2 = e2.dot(z);
  const double s = (g22 * r1 - g12 * r2) / det, t = (g11 * r2 - g12 * r1) / det;
  return z - s * e1 - t * e2;
}

struct MonotoneIntegrand {
  double c2_lambda;
  double alpha;
  double operator()(const Point& z, const Point& e1, const Point& e2) const {
    const double r2 = z.squaredNorm();
    if (r2 == 0.0) return 0.0;
    const double w = std::exp(c2_lambda * std::pow(std::sqrt(r2), alpha));
    return w * normal_part(z, e1, e2).squaredNorm() / (2.0 * r2 * r2);
  }
};

/// Integral of f over the part of triangle abc (centered at p) in the
/// annulus s <= |z| <= sigma. Whole triangles use the 3-point rule; cut
/// triangles are split and the leaves weighted by their exact clipped area.
inline double annulus_integral(const Point& a, const Point& b, const Point& c, double s, double sigma,
                               const MonotoneIntegrand& f, const Point& e1, const Point& e2, int depth) {
  const Point zero = Point::Zero(a.size());
  const double dmax = std::max({a.norm(), b.norm(), c.norm()});
  if (dmax < s) return 0.0;
  const double dmin = point_triangle_distance(zero, a, b, c);
  if (dmin > sigma) return 0.0;
  if (dmin >= s && dmax <= sigma) {
    const Point u = b - a, v = c - a;
    const double area = 0.5 * std::sqrt(std::max(0.0, u.squaredNorm() * v.squaredNorm() - std::pow(u.dot(v), 2)));
    const Point q1 = (4.0 * a + b + c) / 6.0, q2 = (a + 4.0 * b + c) / 6.0, q3 = (a + b + 4.0 * c) / 6.0;
    return area / 3.0 * (f(q1, e1, e2) + f(q2, e1, e2) + f(q3, e1, e2));
  }
  if (depth == 0) {
    const double area = clip_triangle(a, b, c, zero, sigma) - clip_triangle(a, b, c, zero, s);
    return std::max(0.0, area) * f((a + b + c) / 3.0, e1, e2);
  }
  const Point ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
  return annulus_integral(a, ab, ca, s, sigma, f, e1, e2, depth - 1) +
         annulus_integral(ab, b, bc, s, sigma, f, e1, e2, depth - 1) +
         annulus_integral(ca, bc, c, s, sigma, f, e1, e2, depth - 1) +
         annulus_integral(ab, bc, ca, s, sigma, f, e1, e2, depth - 1);
}

}  // namespace detail

struct MonotonicityRow {
  double s = 0.0, sigma = 0.0;
  double lhs = 0.0, rhs = 0.0;
  double slack = 0.0;  // lhs - rhs
  bool pass = true;
};

struct MonotonicityReport {
  std::vector<double> radii;   // ascending
  std::vector<double> masses;  // ||T||(B_r(p))
  std::vector<MonotonicityRow> rows;
  int violations = 0;
  double min_slack = 0.0;
  double max_abs_lhs = 0.0, max_abs_rhs = 0.0;
  double tolerance = 0.0;
  double max_cone_normal = 0.0;  // largest |z^perp|/|z| over triangles with all vertices in B_sigma_max
};

struct MonotonicityOptions {
  double tolerance = 1e-6;
  int quad_depth = 4;
  Point p;  // empty means the origin
};

inline double monotone_integral(const Chain& t, const Point& p, double s, double sigma,
                                const detail::MonotoneIntegrand& f, int depth) {
  const auto& cx = t.complex();
  double sum = 0.0;
  for (const auto& [id, coef] : t.coeffs()) {
    const auto pts = cx.points(2, id);
    const Point a = pts[0] - p, b = pts[1] - p, c = pts[2] - p;
    sum += static_cast<double>(std::llabs(coef)) *
           detail::annulus_integral(a, b, c, s, sigma, f, b - a, c - a, depth);
  }
  return sum;
}

inline MonotonicityReport monotonicity_check(const Chain& t, const AlmostMinParams& prm, double alpha,
                                             std::vector<double> radii, const MonotonicityOptions& opt = {}) {
  prm.validate();
  if (t.dim() != 2) throw MonotoneError("monotonicity check needs a 2-chain");
  if (radii.size() < 2) throw MonotoneError("need at least two radii");
  std::sort(radii.begin(), radii.end());
  if (!(radii.front() > 0.0)) throw MonotoneError("radii must be positive");
  const Point p = origin_or(opt.p, t.complex().ambient_dim());
  MonotonicityReport rep;
  rep.radii = radii;
  rep.tolerance = opt.tolerance;
  rep.masses = parallel_map(radii.size(), [&](std::size_t i) { return mass(t, Ball{p, radii[i]}); });
  if (rep.masses.front() == 0.0) throw MonotoneError("no mass near p");
  const detail::MonotoneIntegrand f{prm.c2 * prm.lambda, alpha};
  const auto rhs = parallel_map(radii.size() - 1, [&](std::size_t i) {
    return monotone_integral(t, p, radii[i], radii[i + 1], f, opt.quad_depth);
  });
  auto weighted = [&](std::size_t i) {
    return std::exp(prm.c2 * prm.lambda * std::pow(radii[i], alpha)) * rep.masses[i] / (radii[i] * radii[i]);
  };
  rep.min_slack = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < radii.size(); ++i) {
    MonotonicityRow row;
    row.s = radii[i];
    row.sigma = radii[i + 1];
    row.lhs = weighted(i + 1) - weighted(i);
    row.rhs = rhs[i];
    row.slack = row.lhs - row.rhs;
    row.pass = row.slack >= -opt.tolerance;
    if (!row.pass) ++rep.violations;
    rep.min_slack = std::min(rep.min_slack, row.slack);
    rep.max_abs_lhs = std::max(rep.max_abs_lhs, std::abs(row.lhs));
    rep.max_abs_rhs = std::max(rep.max_abs_rhs, std::abs(row.rhs));
    rep.rows.push_back(row);
  }
  const auto& cx = t.complex();
  for (const auto& [id, coef] : t.coeffs()) {
    const auto pts = cx.points(2, id);
    const Point a = pts[0] - p, b = pts[1] - p, c = pts[2] - p;
    if (std::max({a.norm(), b.norm(), c.norm()}) > radii.back()) continue;
    for (const Point* z : {&a, &b, &c})
      if (z->norm() > 0.0)
        rep.max_cone_normal = std::max(rep.max_cone_normal, detail::normal_part(*z, b - a, c - a).norm() / z->norm());
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Lower bound on the excess.

struct ExcessBoundRow {
  double rho = 0.0, excess = 0.0, bound = 0.0, slack = 0.0;
  bool pass = true;
};

struct ExcessBoundReport {
  std::vector<ExcessBoundRow> rows;
  double fitted_c = 0.0;  // smallest C with e >= -C Lambda rho^alpha Theta on every row
  bool pass = true;
};

inline ExcessBoundReport excess_lower_bound_check(const Chain& t, const AlmostMinParams& prm,
                                                  const std::vector<double>& radii, double theta, double tol = 1e-6,
                                                  const Point& p = {}) {
  prm.validate();
  ExcessBoundReport rep;
  const auto ratios = mass_ratios(t, p, radii);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    ExcessBoundRow row;
    row.rho = radii[i];
    row.excess = ratios[i] - theta;
    const double scale = prm.lambda * std::pow(radii[i], prm.alpha0) * theta;
    row.bound = -prm.c2 * scale;
    row.slack = row.excess - row.bound;
    row.pass = row.slack >= -tol;
    rep.pass = rep.pass && row.pass;
    if (row.excess < 0.0 && scale > 0.0) rep.fitted_c = std::max(rep.fitted_c, -row.excess / scale);
    rep.rows.push_back(row);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Almost-minimality against explicit competitors.

struct Competitor {
  std::string name;
  Chain chain;
  double support_radius = 0.0;  // radius of a ball around p containing spt of the change
};

/// Meshes `base` and `modified` over identical parameter meshes and records
/// where they differ. Both surfaces must have matching sheet layouts.
inline Competitor make_competitor(const std::string& name, const Surface& base, const Surface& modified,
                                  const SheetMeshOptions& opt, const Point& p = {}) {
  if (base.sheets.size() != modified.sheets.size() || base.ambient_dim != modified.ambient_dim)
    throw MonotoneError("competitor must share the sheet layout");
  const Point c = origin_or(p, base.ambient_dim);
  Competitor out;
  out.name = name;
  for (std::size_t j = 0; j < base.sheets.size(); ++j) {
    const auto& s0 = base.sheets[j];
    const auto& s1 = modified.sheets[j];
    if (s0.half != s1.half || s0.mult != s1.mult) throw MonotoneError("competitor must share the sheet layout");
    const ParamMesh m = sheet_param_mesh(s0.half, std::min(s0.domain_radius, s1.domain_radius), opt);
    std::vector<Point> x0, x1;
    for (const auto& w : m.points) {
      x0.push_back(s0.map(w));
      x1.push_back(s1.map(w));
    }
    // A moved vertex changes every triangle around it.
    for (const auto& t : m.triangles) {
      bool moved = false;
      for (int v : t) moved = moved || (x0[v] - x1[v]).norm() > 1e-14;
      if (!moved) continue;
      for (int v : t) out.support_radius = std::max({out.support_radius, (x0[v] - c).norm(), (x1[v] - c).norm()});
    }
  }
  out.chain = surface_chain(modified, opt, {}, std::numeric_limits<double>::infinity());
  return out;
}

struct AlmostMinRow {
  std::string name;
  double mass_t = 0.0, mass_competitor = 0.0, ratio = 0.0, allowed = 0.0;
  bool pass = true;
};

struct AlmostMinReport {
  std::vector<AlmostMinRow> rows;
  double worst_ratio = 0.0;
  bool pass = true;
};

inline AlmostMinReport almost_min_check(const Chain& t, const std::vector<Competitor>& competitors,
                                        const AlmostMinParams& prm, double r, const Point& p = {},
                                        double tol = 1e-12) {
  prm.validate();
  if (!(r > 0.0) || r > prm.r0) throw MonotoneError("radius must lie in (0, r0]");
  const Point c = origin_or(p, t.complex().ambient_dim());
  AlmostMinReport rep;
  const double mt = mass(t, Ball{c, r});
  for (const auto& comp : competitors) {
    if (comp.support_radius > r) throw MonotoneError("competitor " + comp.name + " escapes the ball");
    AlmostMinRow row;
    row.name = comp.name;
    row.mass_t = mt;
    row.mass_competitor = mass(comp.chain, Ball{c, r});
    row.ratio = row.mass_competitor > 0.0 ? mt / row.mass_competitor : std::numeric_limits<double>::infinity();
    row.allowed = 1.0 + prm.lambda * std::pow(r, prm.alpha0);
    row.pass = mt <= row.allowed * row.mass_competitor + tol;
    rep.pass = rep.pass && row.pass;
    rep.worst_ratio = std::max(rep.worst_ratio, row.ratio);
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace conelab
