#pragma once

// Sphere-preserving diffeomorphisms that flatten a C^{1,alpha} boundary
// curve through the origin onto its tangent line.

#include "conelab/currents.hpp"
#include "conelab/surface.hpp"

#include <fstream>
#include <memory>
#include <random>
#include <sstream>

namespace conelab {

struct StraightenError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Graph {(t, psi(t))} in R^{1+n}, sampled at increasing t with values and
/// derivatives. psi is evaluated by cubic Hermite interpolation.
struct CurveGraph {
  int n = 2;
  double alpha1 = 1.0;
  std::vector<double> t;
  std::vector<Point> psi, dpsi;

  int ambient_dim() const { return n + 1; }

  std::size_t interval(double s) const {
    const auto it = std::upper_bound(t.begin(), t.end(), s);
    const std::size_t i = it == t.begin() ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
    return std::min(i, t.size() - 2);
  }

  Point value(double s) const {
    if (s < t.front() || s > t.back()) throw StraightenError("curve evaluated outside its samples");
    const std::size_t i = interval(s);
    const double h = t[i + 1] - t[i], u = (s - t[i]) / h;
    const double h00 = 2 * u * u * u - 3 * u * u + 1, h10 = u * u * u - 2 * u * u + u;
    const double h01 = -2 * u * u * u + 3 * u * u, h11 = u * u * u - u * u;
    return h00 * psi[i] + h10 * h * dpsi[i] + h01 * psi[i + 1] + h11 * h * dpsi[i + 1];
  }

  Point derivative(double s) const {
    if (s < t.front() || s > t.back()) throw StraightenError("curve evaluated outside its samples");
    const std::size_t i = interval(s);
    const double h = t[i + 1] - t[i], u = (s - t[i]) / h;
    const double d00 = 6 * u * u - 6 * u, d10 = 3 * u * u - 4 * u + 1;
    const double d01 = -6 * u * u + 6 * u, d11 = 3 * u * u - 2 * u;
    return (d00 * psi[i] + d01 * psi[i + 1]) / h + d10 * dpsi[i] + d11 * dpsi[i + 1];
  }

  Point point(double s) const {
    Point p(n + 1);
    p[0] = s;
    p.tail(n) = value(s);
    return p;
  }

  void validate() const {
    if (n < 1) throw StraightenError("codimension must be positive");
    if (t.size() < 2 || psi.size() != t.size() || dpsi.size() != t.size())
      throw StraightenError("curve needs matching samples");
    for (std::size_t i = 0; i + 1 < t.size(); ++i)
      if (!(t[i + 1] > t[i])) throw StraightenError("curve samples must increase in t");
    for (std::size_t i = 0; i < t.size(); ++i)
      if (psi[i].size() != n || dpsi[i].size() != n) throw StraightenError("curve sample has wrong dimension");
    if (!(t.front() <= 0.0 && t.back() >= 0.0)) throw StraightenError("curve must pass over t = 0");
    if (value(0.0).norm() > 1e-12 || derivative(0.0).norm() > 1e-12)
      throw StraightenError("curve must satisfy psi(0) = 0 and Dpsi(0) = 0");
  }
};

/// Samples psi and its derivative on [-extent, extent] with 2*half+1 nodes.
inline CurveGraph sample_curve(int n, const std::function<Point(double)>& psi, const std::function<Point(double)>& dpsi,
                               double alpha1 = 1.0, double extent = 2.0, int half = 400) {
  CurveGraph c;
  c.n = n;
  c.alpha1 = alpha1;
  for (int i = -half; i <= half; ++i) {
    const double s = extent * i / half;
    c.t.push_back(s);
    c.psi.push_back(psi(s));
    c.dpsi.push_back(dpsi(s));
  }
  c.validate();
  return c;
}

/// psi(t) = amp * t^2 along the first normal direction.
inline CurveGraph parabola_curve(double amp, int n = 2, int half = 400) {
  return sample_curve(
      n, [amp, n](double s) -> Point { return amp * s * s * Point::Unit(n, 0); },
      [amp, n](double s) -> Point { return 2.0 * amp * s * Point::Unit(n, 0); }, 1.0, 2.0, half);
}

// Plain text: `t psi_1..psi_n dpsi_1..dpsi_n` per row, `#` starts a comment.
inline void write_curve(std::ostream& os, const CurveGraph& c) {
  os << "# t psi[" << c.n << "] dpsi[" << c.n << "]\n";
  os.precision(17);
  for (std::size_t i = 0; i < c.t.size(); ++i) {
    os << c.t[i];
    for (int k = 0; k < c.n; ++k) os << ' ' << c.psi[i][k];
    for (int k = 0; k < c.n; ++k) os << ' ' << c.dpsi[i][k];
    os << '\n';
  }
}

inline CurveGraph read_curve(std::istream& is, double alpha1 = 1.0) {
  CurveGraph c;
  c.alpha1 = alpha1;
  c.n = -1;
  std::string line;
  while (std::getline(is, line)) {
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::vector<double> v;
    for (double x; ls >> x;) v.push_back(x);
    if (v.empty()) continue;
    if (v.size() < 3 || v.size() % 2 == 0) throw StraightenError("curve row needs t, psi[n], dpsi[n]");
    const int n = static_cast<int>(v.size() - 1) / 2;
    if (c.n >= 0 && n != c.n) throw StraightenError("curve rows disagree on dimension");
    c.n = n;
    c.t.push_back(v[0]);
    c.psi.push_back(Eigen::Map<const Eigen::VectorXd>(v.data() + 1, n));
    c.dpsi.push_back(Eigen::Map<const Eigen::VectorXd>(v.data() + 1 + n, n));
  }
  c.validate();
  return c;
}

inline CurveGraph load_curve(const std::string& path, double alpha1 = 1.0) {
  std::ifstream f(path);
  if (!f) throw StraightenError("cannot open curve file " + path);
  return read_curve(f, alpha1);
}

// ---------------------------------------------------------------------------
// Hoelder seminorms.

/// Tangent-line seminorm of the curve over samples with |p| <= radius:
/// max |T_p - T_q| / |p - q|^alpha, tangent lines compared as unit
/// directions up to sign.
inline double holder_seminorm(const CurveGraph& c, double alpha, double radius) {
  std::vector<Point> pts, tans;
  for (std::size_t i = 0; i < c.t.size(); ++i) {
    Point p = c.point(c.t[i]);
    if (p.norm() > radius) continue;
    Point d(c.n + 1);
    d[0] = 1.0;
    d.tail(c.n) = c.dpsi[i];
    pts.push_back(std::move(p));
    tans.push_back(d.normalized());
  }
  if (pts.size() < 2) throw StraightenError("region misses the curve");
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double dt = std::min((tans[i] - tans[j]).norm(), (tans[i] + tans[j]).norm());
      best = std::max(best, dt / std::pow((pts[i] - pts[j]).norm(), alpha));
    }
  return best;
}

/// [D psi]_alpha over samples with |t| <= radius.
inline double derivative_seminorm(const CurveGraph& c, double alpha, double radius) {
  double best = 0.0;
  for (std::size_t i = 0; i < c.t.size(); ++i) {
    if (std::abs(c.t[i]) > radius) continue;
    for (std::size_t j = i + 1; j < c.t.size(); ++j) {
      if (std::abs(c.t[j]) > radius) continue;
      best = std::max(best, (c.dpsi[i] - c.dpsi[j]).norm() / std::pow(std::abs(c.t[i] - c.t[j]), alpha));
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// The straightening map.

/// 1 on [0, 1], quintic smoothstep down to 0 on [1, 2].
inline double cutoff(double s) {
  const double a = std::abs(s);
  if (a <= 1.0) return 1.0;
  if (a >= 2.0) return 0.0;
  const double u = a - 1.0;
  return 1.0 - u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

struct StraightenOptions {
  double epsilon1 = 0.05;
  double max_condition = 4.0;
  double inverse_tol = 1e-10;
  int inverse_steps = 50;
};

class Straightening {
 public:
  Straightening(std::shared_ptr<const CurveGraph> curve, StraightenOptions opt)
      : curve_(std::move(curve)), opt_(opt) {}

  int ambient_dim() const { return curve_->n + 1; }
  const CurveGraph& curve() const { return *curve_; }
  const StraightenOptions& options() const { return opt_; }

  Point h(const Point& x) const {
    Point y = x;
    const double c = cutoff(x[0]);
    if (c > 0.0) y.tail(curve_->n) -= c * curve_->value(x[0]);
    return y;
  }

  Point operator()(const Point& x) const {
    const double r = x.norm();
    if (r == 0.0) return x;
    const Point y = h(x);
    return (r / y.norm()) * y;
  }

  /// Central differences, column j = d phi / d x_j.
  Eigen::MatrixXd jacobian(const Point& x) const {
    const int d = ambient_dim();
    const double step = 1e-6 * std::max(x.norm(), 1e-2);
    Eigen::MatrixXd jac(d, d);
    for (int j = 0; j < d; ++j) {
      Point a = x, b = x;
      a[j] += step;
      b[j] -= step;
      jac.col(j) = ((*this)(a) - (*this)(b)) / (2.0 * step);
    }
    return jac;
  }

  double condition(const Point& x) const {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jacobian(x));
    const auto& s = svd.singularValues();
    return s(0) / s(s.size() - 1);
  }

  /// Damped fixed point y <- y + lambda (x - phi(y)).
  Point inverse(const Point& x) const {
    Point y = x;
    double lambda = 1.0;
    double res = ((*this)(y) - x).norm();
    for (int it = 0; it < opt_.inverse_steps && res > opt_.inverse_tol; ++it) {
      const Point next = y + lambda * (x - (*this)(y));
      const double nres = ((*this)(next) - x).norm();
      if (nres < res) {
        y = next;
        res = nres;
      } else {
        lambda *= 0.5;
      }
    }
    if (res > opt_.inverse_tol) throw StraightenError("inverse did not converge");
    return y;
  }

 private:
  std::shared_ptr<const CurveGraph> curve_;
  StraightenOptions opt_;
};

inline Straightening build_straightening(const CurveGraph& curve, const StraightenOptions& opt = {}) {
  curve.validate();
  if (curve.t.front() > -2.0 || curve.t.back() < 2.0)
    throw StraightenError("curve must be sampled on [-2, 2], the support of the cutoff");
  const double semi = holder_seminorm(curve, curve.alpha1, std::numeric_limits<double>::infinity());
  if (semi > opt.epsilon1) throw StraightenError("curve seminorm exceeds epsilon1");
  Straightening phi(std::make_shared<const CurveGraph>(curve), opt);
  // Condition numbers on a shell grid around the cutoff region.
  const int d = curve.n + 1;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int i = 0; i < 200; ++i) {
    Point x(d);
    for (int k = 0; k < d; ++k) x[k] = g(rng);
    x *= (0.05 + 2.5 * (i % 50) / 50.0) / x.norm();
    if (phi.condition(x) > opt.max_condition) throw StraightenError("straightening is not invertible: seminorm too large");
  }
  return phi;
}

// ---------------------------------------------------------------------------
// Verification.

struct SandwichRow {
  double rho = 0.0;
  double mass_before = 0.0, mass_after = 0.0, ratio = 1.0;
  double constant = 0.0;  // |ratio - 1| / ([D psi] rho^alpha)
  bool pass = true;
};

struct StraighteningReport {
  double sphere_error = 0.0;   // (i)
  double line_error = 0.0;     // (ii)
  double inverse_error = 0.0;  // phi(phi^{-1}(x)) - x
  double dpsi_seminorm = 0.0;
  double curve_seminorm = 0.0;
  double dphi_seminorm = 0.0;  // (iii) raw
  double c_iii = 0.0;
  double iv_raw = 0.0;  // sup (|phi(x) - x| / |x| + |D phi(x) - Id|) / |x|^alpha
  double c_iv = 0.0;
  double c1 = 10.0;
  double boundary_offset = 0.0;  // distance of the straightened test boundary from the line
  std::vector<SandwichRow> sandwich;
  bool pass_i = false, pass_ii = false, pass_iii = false, pass_iv = false, pass_sandwich = false;
  bool pass() const { return pass_i && pass_ii && pass_iii && pass_iv && pass_sandwich; }
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  int samples = 1000;
  int holder_samples = 300;
  double c1 = 10.0;
  double sphere_tol = 1e-12;
  double line_tol = 1e-8;
  std::vector<double> sandwich_radii{0.25, 0.5, 1.0};
  double mesh_h = 0.02;
};

/// Half-plane whose edge is the curve: w -> (w.x, psi(w.x)) + w.y * v with
/// v the last coordinate direction (the curve must stay off it).
inline Surface bent_edge_half_plane(const CurveGraph& curve) {
  const int d = curve.n + 1;
  auto c = std::make_shared<const CurveGraph>(curve);
  Surface s;
  s.ambient_dim = d;
  s.name = "bent_edge_half_plane";
  s.sheets.push_back({[c, d](const Eigen::Vector2d& w) -> Point {
                        const double x = std::clamp(w.x(), c->t.front(), c->t.back());
                        Point p = c->point(x);
                        p[d - 1] += w.y();
                        return p;
                      },
                      true, 1.5, 1});
  return s;
}

inline StraighteningReport verify_straightening(const Straightening& phi, const VerifyOptions& opt = {}) {
  const CurveGraph& curve = phi.curve();
  const int d = phi.ambient_dim();
  const double alpha = curve.alpha1;
  StraighteningReport rep;
  rep.c1 = opt.c1;
  rep.dpsi_seminorm = derivative_seminorm(curve, alpha, 2.0);
  rep.curve_seminorm = holder_seminorm(curve, alpha, std::numeric_limits<double>::infinity());
  auto scaled = [&](double raw) { return rep.dpsi_seminorm > 0.0 ? raw / rep.dpsi_seminorm : raw; };

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto random_in_ball = [&] {
    Point x(d);
    for (int k = 0; k < d; ++k) x[k] = g(rng);
    return Point(x * (std::pow(u(rng), 1.0 / d) / x.norm()));
  };

  // (i) and the inverse.
  for (int i = 0; i < opt.samples; ++i) {
    const Point x = random_in_ball();
    rep.sphere_error = std::max(rep.sphere_error, std::abs(phi(x).norm() - x.norm()));
    rep.inverse_error = std::max(rep.inverse_error, (phi(phi.inverse(x)) - x).norm());
  }
  rep.pass_i = rep.sphere_error <= opt.sphere_tol;

  // (ii): curve points in B_1 land on the line.
  for (double s : curve.t) {
    const Point p = curve.point(s);
    if (p.norm() > 1.0) continue;
    rep.line_error = std::max(rep.line_error, phi(p).tail(curve.n).norm());
  }
  rep.pass_ii = rep.line_error <= opt.line_tol;

  // (iii) and (iv) on samples with |x| >= 1e-3.
  std::vector<Point> xs;
  std::vector<Eigen::MatrixXd> jac;
  for (int i = 0; i < opt.holder_samples; ++i) {
    Point x = random_in_ball();
    if (i % 3 == 0) x *= std::pow(10.0, -3.0 * u(rng)) / std::max(x.norm(), 1e-12);  // log-spread radii
    if (x.norm() < 1e-3) x *= 1e-3 / x.norm();
    xs.push_back(x);
    jac.push_back(phi.jacobian(x));
  }
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = xs[i].norm();
    const double v = ((phi(xs[i]) - xs[i]).norm() / r + (jac[i] - id).norm()) / std::pow(r, alpha);
    rep.iv_raw = std::max(rep.iv_raw, v);
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      const double dist = (xs[i] - xs[j]).norm();
      if (dist < 1e-2) continue;  // finite-difference noise dominates below this
      rep.dphi_seminorm = std::max(rep.dphi_seminorm, (jac[i] - jac[j]).norm() / std::pow(dist, alpha));
    }
  }
  rep.c_iii = scaled(rep.dphi_seminorm);
  rep.c_iv = scaled(rep.iv_raw);
  rep.pass_iii = rep.c_iii <= opt.c1;
  rep.pass_iv = rep.c_iv <= opt.c1;

  // Mass sandwich and straightened boundary on a bent-edge half-plane.
  SheetMeshOptions mo;
  mo.graded = false;
  mo.h = opt.mesh_h;
  const Chain t = surface_chain(bent_edge_half_plane(curve), mo, {}, 1e9);
  const Chain pushed = pushforward(t, [&](const Point& x) { return phi(x); });
  rep.pass_sandwich = true;
  for (double rho : opt.sandwich_radii) {
    SandwichRow row;
    row.rho = rho;
    row.mass_before = mass(t, Ball{Point::Zero(d), rho});
    row.mass_after = mass(pushed, Ball{Point::Zero(d), rho});
    row.ratio = row.mass_after / row.mass_before;
    const double scale = rep.dpsi_seminorm * std::pow(rho, alpha);
    row.constant = scale > 0.0 ? std::abs(row.ratio - 1.0) / scale : std::abs(row.ratio - 1.0);
    row.pass = std::abs(row.ratio - 1.0) <= opt.c1 * scale + 1e-12;
    rep.pass_sandwich = rep.pass_sandwich && row.pass;
    rep.sandwich.push_back(row);
  }
  const Chain bd = boundary(pushed);
  const auto& cx = bd.complex();
  for (const auto& [id, coef] : bd.coeffs()) {
    for (const auto& p : cx.points(1, id))
      if (p.norm() < 1.0 - 1e-9) rep.boundary_offset = std::max(rep.boundary_offset, p.tail(curve.n).norm());
  }
  return rep;
}

}  // namespace conelab
