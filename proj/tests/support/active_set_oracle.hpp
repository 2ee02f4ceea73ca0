#pragma once

// Independent QP oracle for small problems: exhaustive active-set
// enumeration over inequality rows and finite bounds, solving each KKT
// equality system directly. Deliberately shares nothing with the
// operator-splitting path it cross-checks.

#include "optiloop/qpsolver.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace optiloop::testing {

struct OracleResult {
  bool found = false;
  double objective = 0.0;
  Eigen::VectorXd x;
};

namespace detail {

struct Facet {
  Eigen::VectorXd a;
  double b = 0.0;
  int sign = 0;  // required multiplier sign: +1 upper-type, -1 lower-type, 0 equality
  int group = -1;  // facets of one two-sided constraint share a group
};

inline bool feasible_point(const CompiledQP& qp, const Eigen::VectorXd& x, double tol) {
  for (long k = 0; k < qp.n; ++k) {
    if (x[k] < qp.lb[k] - tol || x[k] > qp.ub[k] + tol) return false;
  }
  for (long i = 0; i < qp.A.rows(); ++i) {
    double v = qp.A.row(i).dot(x);
    switch (qp.relations[static_cast<size_t>(i)]) {
      case Relation::le:
        if (v > qp.rhs[i] + tol) return false;
        break;
      case Relation::ge:
        if (v < qp.rhs[i] - tol) return false;
        break;
      case Relation::eq:
        if (std::abs(v - qp.rhs[i]) > tol) return false;
        break;
    }
  }
  return true;
}

}  // namespace detail

inline OracleResult active_set_solve(const CompiledQP& qp, double tol = 1e-9) {
  using detail::Facet;
  const long n = qp.n;

  std::vector<Facet> equalities;
  std::vector<Facet> candidates;
  int group = 0;

  for (long i = 0; i < qp.A.rows(); ++i) {
    Facet f;
    f.a = qp.A.row(i).transpose();
    f.b = qp.rhs[i];
    switch (qp.relations[static_cast<size_t>(i)]) {
      case Relation::eq:
        f.sign = 0;
        equalities.push_back(f);
        break;
      case Relation::le:
        f.sign = +1;
        f.group = group++;
        candidates.push_back(f);
        break;
      case Relation::ge:
        f.sign = -1;
        f.group = group++;
        candidates.push_back(f);
        break;
    }
  }
  for (long k = 0; k < n; ++k) {
    if (qp.lb[k] == qp.ub[k]) {
      Facet f;
      f.a = Eigen::VectorXd::Unit(n, k);
      f.b = qp.lb[k];
      f.sign = 0;
      equalities.push_back(f);
      continue;
    }
    int g = group++;
    if (std::isfinite(qp.lb[k])) {
      Facet f;
      f.a = Eigen::VectorXd::Unit(n, k);
      f.b = qp.lb[k];
      f.sign = -1;
      f.group = g;
      candidates.push_back(f);
    }
    if (std::isfinite(qp.ub[k])) {
      Facet f;
      f.a = Eigen::VectorXd::Unit(n, k);
      f.b = qp.ub[k];
      f.sign = +1;
      f.group = g;
      candidates.push_back(f);
    }
  }

  const size_t nc = candidates.size();
  OracleResult best;

  auto try_active_set = [&](const std::vector<int>& subset) {
    long na = static_cast<long>(equalities.size() + subset.size());
    Eigen::MatrixXd K(n + na, n + na);
    K.setZero();
    K.topLeftCorner(n, n) = qp.Q;
    Eigen::VectorXd rhs(n + na);
    rhs.head(n) = -qp.q;
    long r = 0;
    std::vector<const Facet*> active;
    for (const auto& f : equalities) active.push_back(&f);
    for (int idx : subset) active.push_back(&candidates[static_cast<size_t>(idx)]);
    for (const Facet* f : active) {
      K.block(n + r, 0, 1, n) = f->a.transpose();
      K.block(0, n + r, n, 1) = f->a;
      rhs[n + r] = f->b;
      ++r;
    }
    // least-squares solve handles redundant active rows; an inconsistent
    // system shows up as a KKT residual and is rejected below
    Eigen::VectorXd sol = K.completeOrthogonalDecomposition().solve(rhs);
    double kkt_err = (K * sol - rhs).cwiseAbs().maxCoeff();
    if (kkt_err > 1e-7 * std::max(1.0, rhs.cwiseAbs().maxCoeff())) return;
    Eigen::VectorXd x = sol.head(n);

    // dual feasibility of the inequality multipliers
    r = 0;
    for (const Facet* f : active) {
      double nu = sol[n + r++];
      if (f->sign == +1 && nu < -1e-7) return;
      if (f->sign == -1 && nu > 1e-7) return;
    }
    if (!detail::feasible_point(qp, x, 1e-7)) return;

    double obj = qp.objective_at(x);
    if (!best.found || obj < best.objective) {
      best.found = true;
      best.objective = obj;
      best.x = x;
    }
    (void)tol;
  };

  // enumerate all candidate subsets of size <= n, skipping subsets that take
  // both sides of one two-sided constraint
  std::vector<int> stack;
  std::function<void(size_t)> rec = [&](size_t start) {
    try_active_set(stack);
    if (static_cast<long>(stack.size()) >= qp.n) return;
    for (size_t i = start; i < nc; ++i) {
      bool clash = false;
      for (int j : stack) {
        if (candidates[static_cast<size_t>(j)].group == candidates[i].group) clash = true;
      }
      if (clash) continue;
      stack.push_back(static_cast<int>(i));
      rec(i + 1);
      stack.pop_back();
    }
  };
  rec(0);

  return best;
}

}  // namespace optiloop::testing
