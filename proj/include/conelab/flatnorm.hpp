#pragma once

// Flat distance between integer chains,
//   d(T, S) = inf { M(R ⌞ B) + M(Q ⌞ B) : T - S = R + ∂Q },
// solved as an LP over real coefficients on the chains' complex, with an
// exhaustive integer oracle for small instances.

#include "conelab/currents.hpp"
#include "conelab/lp.hpp"

#include <string>

namespace conelab {

struct FlatNormError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FlatNormCertificate {
  double value = 0.0;
  Chain remainder;  // R, dimension k
  Chain filling;    // Q, dimension k+1
  double ball_radius = 0.0;
  bool integral = true;
  // Relaxed (non-integral) optimum coefficients, filled only when !integral.
  std::vector<double> relaxed_remainder;
  std::vector<double> relaxed_filling;
  double feasibility_residual = 0.0;
  int iterations = 0;
  std::vector<std::string> warnings;
};

struct FlatNormOptions {
  Point center;  // empty means the origin
  double integrality_tol = 1e-6;
};

namespace detail {

inline std::vector<double> ball_weights(const SimplicialComplex& cx, int k, const Point& center, double radius) {
  std::vector<double> w(cx.num_simplices(k));
  for (int id = 0; id < static_cast<int>(w.size()); ++id) w[id] = cx.clipped_measure(k, id, center, radius);
  return w;
}

inline void check_pair(const Chain& t, const Chain& s) {
  if (t.complex_ptr() != s.complex_ptr()) throw FlatNormError("chains live on different complexes");
  if (t.dim() != s.dim()) throw FlatNormError("dimension mismatch");
  if (t.dim() + 1 > kMaxSimplexDim || t.complex().num_simplices(t.dim() + 1) == 0)
    throw FlatNormError("complex has no (k+1)-simplices");
}

}  // namespace detail

/// Recomputes the certificate identity T - S = R + ∂Q in integers.
inline bool certificate_feasible(const Chain& t, const Chain& s, const FlatNormCertificate& cert) {
  if (!cert.integral) return false;
  return (t - s) == (cert.remainder + boundary(cert.filling));
}

inline FlatNormCertificate flat_distance(const Chain& t, const Chain& s, double ball_radius,
                                         const FlatNormOptions& opt = {}) {
  detail::check_pair(t, s);
  const auto& cx = t.complex();
  const int k = t.dim();
  const Point center = opt.center.size() ? opt.center : Point::Zero(cx.ambient_dim());
  const auto wk = detail::ball_weights(cx, k, center, ball_radius);
  const auto wk1 = detail::ball_weights(cx, k + 1, center, ball_radius);
  const Chain diff = t - s;
  const int m = static_cast<int>(cx.num_simplices(k));
  const int nq = static_cast<int>(cx.num_simplices(k + 1));

  lp::Problem prob;
  prob.rows = m;
  prob.rhs = Eigen::VectorXd::Zero(m);
  for (const auto& [id, c] : diff.coeffs()) prob.rhs[id] = static_cast<double>(c);
  for (int tau = 0; tau < nq; ++tau) {
    lp::Column plus, minus;
    for (const auto& f : cx.faces(k + 1, tau)) {
      plus.entries.emplace_back(f.id, f.sign);
      minus.entries.emplace_back(f.id, -f.sign);
    }
    prob.add_column(std::move(plus), wk1[tau]);
    prob.add_column(std::move(minus), wk1[tau]);
  }
  const int rbase = static_cast<int>(prob.columns.size());
  std::vector<int> basis(m);
  for (int sigma = 0; sigma < m; ++sigma) {
    prob.add_column({{{sigma, 1.0}}}, wk[sigma]);
    prob.add_column({{{sigma, -1.0}}}, wk[sigma]);
    basis[sigma] = rbase + 2 * sigma + (prob.rhs[sigma] >= 0.0 ? 0 : 1);
  }
  const auto res = lp::solve(prob, basis);
  if (res.status != lp::Status::Optimal)
    throw FlatNormError(std::string("flat norm LP did not reach optimality: ") + lp::to_string(res.status));

  FlatNormCertificate cert;
  cert.ball_radius = ball_radius;
  cert.iterations = res.iterations;
  std::vector<double> q(nq), r(m);
  for (int tau = 0; tau < nq; ++tau) q[tau] = res.x[2 * tau] - res.x[2 * tau + 1];
  for (int sigma = 0; sigma < m; ++sigma) r[sigma] = res.x[rbase + 2 * sigma] - res.x[rbase + 2 * sigma + 1];
  auto near_int = [&](double v) { return std::abs(v - std::round(v)) <= opt.integrality_tol; };
  cert.integral = std::all_of(q.begin(), q.end(), near_int) && std::all_of(r.begin(), r.end(), near_int);
  cert.remainder = Chain(t.complex_ptr(), k);
  cert.filling = Chain(t.complex_ptr(), k + 1);
  if (cert.integral) {
    for (int tau = 0; tau < nq; ++tau) cert.filling.add(tau, std::llround(q[tau]));
    for (int sigma = 0; sigma < m; ++sigma) cert.remainder.add(sigma, std::llround(r[sigma]));
    if (!certificate_feasible(t, s, cert)) {
      cert.warnings.push_back("rounded certificate is infeasible");
      cert.integral = false;
    }
  }
  if (cert.integral) {
    cert.value = mass(cert.remainder, Ball{center, ball_radius}) + mass(cert.filling, Ball{center, ball_radius});
  } else {
    cert.warnings.push_back("non-integral flat norm optimum (relative torsion?)");
    cert.relaxed_filling = q;
    cert.relaxed_remainder = r;
    cert.value = 0.0;
    for (int tau = 0; tau < nq; ++tau) cert.value += wk1[tau] * std::abs(q[tau]);
    for (int sigma = 0; sigma < m; ++sigma) cert.value += wk[sigma] * std::abs(r[sigma]);
    // Residual of T - S = r + ∂q per coefficient.
    std::vector<double> resid(m);
    for (int sigma = 0; sigma < m; ++sigma) resid[sigma] = prob.rhs[sigma] - r[sigma];
    for (int tau = 0; tau < nq; ++tau)
      for (const auto& f : cx.faces(k + 1, tau)) resid[f.id] -= f.sign * q[tau];
    for (double v : resid) cert.feasibility_residual = std::max(cert.feasibility_residual, std::abs(v));
  }
  return cert;
}

/// Exact minimum over integer fillings with |q| <= coeff_bound by
/// depth-first enumeration with branch-and-bound.
inline double flat_distance_bruteforce(const Chain& t, const Chain& s, int coeff_bound, double ball_radius = 1e300,
                                       const Point& center_in = Point()) {
  detail::check_pair(t, s);
  const auto& cx = t.complex();
  const int k = t.dim();
  const int nq = static_cast<int>(cx.num_simplices(k + 1));
  if (nq > 14) throw FlatNormError("instance too large for brute force (more than 14 (k+1)-simplices)");
  if (coeff_bound < 0 || coeff_bound > 3) throw FlatNormError("coefficient bound must be in [0, 3]");
  const Point center = center_in.size() ? center_in : Point::Zero(cx.ambient_dim());
  const auto wk = detail::ball_weights(cx, k, center, ball_radius);
  const auto wk1 = detail::ball_weights(cx, k + 1, center, ball_radius);
  const int m = static_cast<int>(cx.num_simplices(k));
  std::vector<long long> r(m, 0);
  const Chain diff = t - s;
  for (const auto& [id, c] : diff.coeffs()) r[id] = c;
  // Rows are settled once their last coface has been assigned.
  std::vector<int> last(m, -1);
  for (int tau = 0; tau < nq; ++tau)
    for (const auto& f : cx.faces(k + 1, tau)) last[f.id] = std::max(last[f.id], tau);
  std::vector<std::vector<int>> settle(nq);
  double fixed = 0.0;
  for (int sigma = 0; sigma < m; ++sigma) {
    if (last[sigma] < 0)
      fixed += wk[sigma] * static_cast<double>(std::llabs(r[sigma]));
    else
      settle[last[sigma]].push_back(sigma);
  }
  double best = std::numeric_limits<double>::infinity();
  std::function<void(int, double)> dfs = [&](int tau, double cost) {
    if (cost >= best - 1e-15) return;
    if (tau == nq) {
      best = cost;
      return;
    }
    const auto faces = cx.faces(k + 1, tau);
    // Try small |q| first so good bounds arrive early.
    for (int mag = 0; mag <= coeff_bound; ++mag) {
      for (int sgn : {1, -1}) {
        if (mag == 0 && sgn < 0) continue;
        const int qv = sgn * mag;
        for (const auto& f : faces) r[f.id] -= static_cast<long long>(f.sign) * qv;
        double c = cost + wk1[tau] * mag;
        for (int sigma : settle[tau]) c += wk[sigma] * static_cast<double>(std::llabs(r[sigma]));
        dfs(tau + 1, c);
        for (const auto& f : faces) r[f.id] += static_cast<long long>(f.sign) * qv;
      }
    }
  };
  dfs(0, fixed);
  return best;
}

/// Flat distance of every element of a sequence to a limit chain.
inline std::vector<double> flat_converges(const std::vector<Chain>& sequence, const Chain& limit, double ball_radius) {
  std::vector<double> out;
  out.reserve(sequence.size());
  for (const auto& c : sequence) out.push_back(flat_distance(c, limit, ball_radius).value);
  return out;
}

}  // namespace conelab
