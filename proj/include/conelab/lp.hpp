#pragma once

// Revised simplex method for small dense LPs in standard form
//   minimize c^T x  subject to  A x = b,  x >= 0
// with sparse columns and an explicit basis inverse.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace conelab::lp {

struct Column {
  std::vector<std::pair<int, double>> entries;  // (row, value)
};

struct Problem {
  int rows = 0;
  std::vector<Column> columns;
  std::vector<double> cost;
  Eigen::VectorXd rhs;

  int add_column(Column col, double c) {
    columns.push_back(std::move(col));
    cost.push_back(c);
    return static_cast<int>(columns.size()) - 1;
  }
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    default: return "iteration-limit";
  }
}

struct Result {
  Status status = Status::IterationLimit;
  double objective = 0.0;
  std::vector<double> x;
  int iterations = 0;
};

struct Options {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-9;
  int refactor_every = 64;
  int degenerate_switch = 40;  // consecutive degenerate pivots before Bland's rule
  int max_iterations = 200000;
};

namespace detail {

class Solver {
 public:
  Solver(const Problem& p, std::vector<double> cost, std::vector<bool> frozen, const Options& opt)
      : p_(p), cost_(std::move(cost)), frozen_(std::move(frozen)), opt_(opt), m_(p.rows) {}

  // Runs simplex iterations from `basis`; returns final status.
  Status run(std::vector<int>& basis, int& iterations) {
    basis_ = &basis;
    in_basis_.assign(p_.columns.size(), -1);
    for (int i = 0; i < m_; ++i) in_basis_[basis[i]] = i;
    refactor();
    int degenerate_run = 0;
    int since_refactor = 0;
    while (iterations < opt_.max_iterations) {
      if (since_refactor >= opt_.refactor_every) {
        refactor();
        since_refactor = 0;
      }
      Eigen::VectorXd cb(m_);
      for (int i = 0; i < m_; ++i) cb[i] = cost_[basis[i]];
      const Eigen::VectorXd y = binv_.transpose() * cb;
      const bool bland = degenerate_run >= opt_.degenerate_switch;
      int enter = -1;
      double best = -opt_.optimality_tol;
      for (int j = 0; j < static_cast<int>(p_.columns.size()); ++j) {
        if (in_basis_[j] >= 0 || frozen_[j]) continue;
        double d = cost_[j];
        for (const auto& [r, v] : p_.columns[j].entries) d -= y[r] * v;
        if (d < best) {
          enter = j;
          if (bland) break;
          best = d;
        }
      }
      if (enter < 0) return Status::Optimal;
      Eigen::VectorXd w = Eigen::VectorXd::Zero(m_);
      for (const auto& [r, v] : p_.columns[enter].entries) w += binv_.col(r) * v;
      int leave = -1;
      double step = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m_; ++i) {
        const bool pinned = frozen_[basis[i]];
        if (pinned && std::abs(w[i]) > opt_.pivot_tol) {
          // Frozen (artificial) columns must stay at zero.
          if (step > 0.0 || (leave >= 0 && basis[i] < basis[leave])) {
            step = 0.0;
            leave = i;
          }
          continue;
        }
        if (w[i] > opt_.pivot_tol) {
          const double ratio = std::max(xb_[i], 0.0) / w[i];
          if (ratio < step - 1e-12 || (ratio <= step + 1e-12 && leave >= 0 && basis[i] < basis[leave])) {
            step = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return Status::Unbounded;
      degenerate_run = step <= 1e-12 ? degenerate_run + 1 : 0;
      xb_ -= step * w;
      xb_[leave] = step;
      const double piv = w[leave];
      binv_.row(leave) /= piv;
      for (int i = 0; i < m_; ++i)
        if (i != leave && w[i] != 0.0) binv_.row(i) -= w[i] * binv_.row(leave);
      in_basis_[basis[leave]] = -1;
      basis[leave] = enter;
      in_basis_[enter] = leave;
      ++iterations;
      ++since_refactor;
    }
    return Status::IterationLimit;
  }

  const Eigen::VectorXd& basic_values() const { return xb_; }

 private:
  void refactor() {
    Eigen::MatrixXd bmat = Eigen::MatrixXd::Zero(m_, m_);
    for (int i = 0; i < m_; ++i)
      for (const auto& [r, v] : p_.columns[(*basis_)[i]].entries) bmat(r, i) = v;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(bmat);
    binv_ = lu.inverse();
    xb_ = binv_ * p_.rhs;
    for (int i = 0; i < m_; ++i)
      if (std::abs(xb_[i]) < 1e-13) xb_[i] = 0.0;
  }

  const Problem& p_;
  std::vector<double> cost_;
  std::vector<bool> frozen_;
  Options opt_;
  int m_;
  std::vector<int>* basis_ = nullptr;
  std::vector<int> in_basis_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd xb_;
};

}  // namespace detail

/// Solves the LP. With `initial_basis` (one column index per row, forming a
/// primal feasible basis) phase one is skipped; otherwise artificial columns
/// are added and driven to zero first.
inline Result solve(const Problem& problem, std::optional<std::vector<int>> initial_basis = std::nullopt,
                    const Options& opt = {}) {
  if (problem.rhs.size() != problem.rows || problem.cost.size() != problem.columns.size())
    throw std::invalid_argument("lp::solve: inconsistent problem dimensions");
  Result res;
  const int n = static_cast<int>(problem.columns.size());
  std::vector<int> basis;
  Problem work = problem;
  std::vector<bool> frozen(n, false);
  if (initial_basis) {
    basis = *initial_basis;
    if (static_cast<int>(basis.size()) != problem.rows) throw std::invalid_argument("lp::solve: basis size");
  } else {
    std::vector<double> phase1(n, 0.0);
    for (int i = 0; i < problem.rows; ++i) {
      const double s = problem.rhs[i] >= 0.0 ? 1.0 : -1.0;
      basis.push_back(work.add_column({{{i, s}}}, 0.0));
      phase1.push_back(1.0);
      frozen.push_back(false);
    }
    detail::Solver s1(work, phase1, frozen, opt);
    const Status st = s1.run(basis, res.iterations);
    if (st != Status::Optimal) {
      res.status = st;
      return res;
    }
    double infeas = 0.0;
    for (int i = 0; i < problem.rows; ++i)
      if (basis[i] >= n) infeas += std::abs(s1.basic_values()[i]);
    if (infeas > opt.feasibility_tol * std::max(1.0, problem.rhs.lpNorm<1>())) {
      res.status = Status::Infeasible;
      return res;
    }
    for (int j = n; j < static_cast<int>(work.columns.size()); ++j) frozen[j] = true;
  }
  std::vector<double> cost = work.cost;
  detail::Solver s2(work, cost, frozen, opt);
  res.status = s2.run(basis, res.iterations);
  res.x.assign(n, 0.0);
  const auto& xb = s2.basic_values();
  for (int i = 0; i < problem.rows; ++i)
    if (basis[i] < n) res.x[basis[i]] = std::max(xb[i], 0.0);
  res.objective = 0.0;
  for (int j = 0; j < n; ++j) res.objective += problem.cost[j] * res.x[j];
  return res;
}

}  // namespace conelab::lp
