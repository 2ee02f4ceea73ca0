#include "optiloop/qpsolver.hpp"

#include "optiloop/ir_eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace optiloop {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string qp_status_name(QPStatus s) {
  switch (s) {
    case QPStatus::optimal: return "optimal";
    case QPStatus::infeasible: return "infeasible";
    case QPStatus::iteration_limit: return "iteration_limit";
  }
  return "?";
}

// --- IR -> matrices ----------------------------------------------------------

namespace {

/// Term-local scope: all constraint quantifiers first, then the symbols this
/// term sums over. Enumeration of the tail gives the term's summation.
struct TermPlan {
  ir_eval::Scope scope;
  size_t n_quant = 0;
};

TermPlan make_term_plan(const FormulationIR& ir, const std::vector<Quantifier>& quantifiers,
                        const std::function<void(ir_eval::Scope&)>& infer) {
  TermPlan plan;
  std::vector<std::string> errs;
  for (const auto& q : quantifiers) plan.scope.bind(ir, q.index, q.set, &errs);
  plan.n_quant = plan.scope.symbols.size();
  infer(plan.scope);
  if (!errs.empty()) throw CompileError("compile: " + errs.front());
  return plan;
}

/// Walks the bindings of the tail (summed) symbols of `plan` for a fixed
/// quantifier binding.
void for_each_sum_binding(const TermPlan& plan, const ir_eval::Binding& quant,
                          const std::function<void(const ir_eval::Binding&)>& fn) {
  ir_eval::Binding b(plan.scope.symbols.size(), 0);
  std::copy(quant.begin(), quant.end(), b.begin());
  size_t nq = plan.n_quant;
  if (nq == b.size()) {
    fn(b);
    return;
  }
  while (true) {
    fn(b);
    int k = static_cast<int>(b.size()) - 1;
    while (k >= static_cast<int>(nq) && ++b[k] >= plan.scope.sizes[k]) {
      b[k] = 0;
      --k;
    }
    if (k < static_cast<int>(nq)) return;
  }
}

}  // namespace

CompiledQP compile_base(const FormulationIR& ir) {
  ValidationReport vr = validate(ir);
  if (!vr.ok()) throw CompileError("compile on invalid IR: " + vr.errors.front());

  CompiledQP qp;

  long offset = 0;
  for (const auto& v : ir.variables) {
    VarSlice slice;
    slice.offset = offset;
    slice.count = 1;
    for (const auto& s : v.shape) {
      int sz = ir.find_set(s)->size;
      slice.sizes.push_back(sz);
      slice.count *= sz;
    }
    qp.vars[v.name] = slice;
    offset += slice.count;
    if (v.visibility == Visibility::public_decision) qp.public_var = v.name;
  }
  qp.n = offset;

  qp.Q = Eigen::MatrixXd::Zero(qp.n, qp.n);
  qp.q = Eigen::VectorXd::Zero(qp.n);
  qp.lb = Eigen::VectorXd::Constant(qp.n, -kInf);
  qp.ub = Eigen::VectorXd::Constant(qp.n, kInf);

  for (const auto& v : ir.variables) {
    const VarSlice& s = qp.vars[v.name];
    qp.lb.segment(s.offset, s.count).setConstant(v.lower);
    qp.ub.segment(s.offset, s.count).setConstant(v.upper);
  }

  auto var_col = [&](const VarRef& ref, const ir_eval::Scope& scope,
                     const ir_eval::Binding& b) -> std::optional<long> {
    const Variable* v = ir.find_variable(ref.name);
    auto off = ir_eval::flat_offset(ir, *v, ref.indices, scope, b);
    if (!off) return std::nullopt;
    return qp.vars[ref.name].offset + *off;
  };

  // objective
  for (const auto& t : ir.objective) {
    TermPlan plan = make_term_plan(ir, {}, [&](ir_eval::Scope& scope) {
      std::vector<std::string> errs;
      if (t.var_a) {
        const Variable* v = ir.find_variable(t.var_a->name);
        ir_eval::infer_symbols(ir, *v, t.var_a->indices, scope, &errs);
      }
      if (t.var_b) {
        const Variable* v = ir.find_variable(t.var_b->name);
        ir_eval::infer_symbols(ir, *v, t.var_b->indices, scope, &errs);
      }
      ir_eval::infer_coef_symbols(ir, t.coef, scope, &errs);
      if (!errs.empty()) throw CompileError("objective term '" + t.name + "': " + errs.front());
    });

    ir_eval::for_each_binding(plan.scope, [&](const ir_eval::Binding& b) {
      auto c = ir_eval::eval_coef(ir, t.coef, plan.scope, b);
      if (!c) return;
      double w = t.weight * *c;
      switch (t.kind) {
        case TermKind::linear_var: {
          auto col = var_col(*t.var_a, plan.scope, b);
          if (col) qp.q[*col] += w;
          break;
        }
        case TermKind::quadratic_var: {
          auto col = var_col(*t.var_a, plan.scope, b);
          if (col) qp.Q(*col, *col) += 2.0 * w;
          break;
        }
        case TermKind::const_data:
          qp.constant += w;
          break;
      }
    });
  }

  // constraints: rows in declaration order, quantifier bindings row-major
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  std::vector<Relation> rels;

  for (const auto& c : ir.constraints) {
    ir_eval::Scope quant_scope;
    std::vector<std::string> errs;
    for (const auto& q : c.quantifiers) quant_scope.bind(ir, q.index, q.set, &errs);
    if (!errs.empty()) throw CompileError("constraint '" + c.name + "': " + errs.front());

    std::vector<TermPlan> plans;
    plans.reserve(c.lhs.size());
    for (const auto& term : c.lhs) {
      plans.push_back(make_term_plan(ir, c.quantifiers, [&](ir_eval::Scope& scope) {
        std::vector<std::string> errs2;
        const Variable* v = ir.find_variable(term.var.name);
        ir_eval::infer_symbols(ir, *v, term.var.indices, scope, &errs2);
        ir_eval::infer_coef_symbols(ir, term.coef, scope, &errs2);
        if (!errs2.empty())
          throw CompileError("constraint '" + c.name + "': " + errs2.front());
      }));
    }

    ir_eval::for_each_binding(quant_scope, [&](const ir_eval::Binding& qb) {
      Eigen::VectorXd row = Eigen::VectorXd::Zero(qp.n);
      for (size_t ti = 0; ti < c.lhs.size(); ++ti) {
        const auto& term = c.lhs[ti];
        for_each_sum_binding(plans[ti], qb, [&](const ir_eval::Binding& b) {
          auto coef = ir_eval::eval_coef(ir, term.coef, plans[ti].scope, b);
          if (!coef) return;
          auto col = var_col(term.var, plans[ti].scope, b);
          if (col) row[*col] += *coef;
        });
      }
      auto r = ir_eval::eval_affine(ir, c.rhs, quant_scope, qb);
      rows.push_back(std::move(row));
      rhs.push_back(r.value_or(0.0));
      rels.push_back(c.relation);
    });
  }

  qp.A.resize(static_cast<long>(rows.size()), qp.n);
  qp.rhs.resize(static_cast<long>(rows.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    qp.A.row(static_cast<long>(i)) = rows[i];
    qp.rhs[static_cast<long>(i)] = rhs[i];
  }
  qp.relations = std::move(rels);

  return qp;
}

CompiledQP compile_subproblem(const FormulationIR& ir, const PlanTensor& z,
                              const PlanTensor& lambda, const PlanTensor& rho) {
  require_same_dims(z, lambda, "compile_subproblem");
  require_same_dims(z, rho, "compile_subproblem");
  if ((rho.values() <= 0.0).any()) {
    throw std::invalid_argument("compile_subproblem: rho must be > 0 elementwise");
  }

  CompiledQP qp = compile_base(ir);
  const VarSlice& pub = qp.public_slice();
  if (pub.count != z.size()) {
    throw DimsMismatch("compile_subproblem: public block does not match plan dims");
  }

  // private(x) - <lambda, x> + 0.5 || sqrt(rho) . (x - z) ||^2
  for (long k = 0; k < pub.count; ++k) {
    long col = pub.offset + k;
    double rk = rho[k];
    qp.Q(col, col) += rk;
    qp.q[col] += -lambda[k] - rk * z[k];
    qp.constant += 0.5 * rk * z[k] * z[k];
  }
  return qp;
}

// --- operator-splitting solve --------------------------------------------------

namespace {

struct StackedProblem {
  // l <= [A; I] x <= u
  Eigen::MatrixXd A;
  Eigen::VectorXd l, u;
  Eigen::VectorXd rho_scale;  // per-row multiplier on rho_hat (equalities stiffer)
};

StackedProblem stack_rows(const CompiledQP& qp) {
  long m = qp.A.rows();
  StackedProblem sp;
  sp.A.resize(m + qp.n, qp.n);
  sp.A.topRows(m) = qp.A;
  sp.A.bottomRows(qp.n) = Eigen::MatrixXd::Identity(qp.n, qp.n);
  sp.l.resize(m + qp.n);
  sp.u.resize(m + qp.n);
  sp.rho_scale = Eigen::VectorXd::Ones(m + qp.n);
  for (long i = 0; i < m; ++i) {
    switch (qp.relations[static_cast<size_t>(i)]) {
      case Relation::le:
        sp.l[i] = -kInf;
        sp.u[i] = qp.rhs[i];
        break;
      case Relation::ge:
        sp.l[i] = qp.rhs[i];
        sp.u[i] = kInf;
        break;
      case Relation::eq:
        sp.l[i] = qp.rhs[i];
        sp.u[i] = qp.rhs[i];
        sp.rho_scale[i] = 1e3;
        break;
    }
  }
  for (long k = 0; k < qp.n; ++k) {
    sp.l[m + k] = qp.lb[k];
    sp.u[m + k] = qp.ub[k];
    if (qp.lb[k] == qp.ub[k]) sp.rho_scale[m + k] = 1e3;
  }
  return sp;
}

double inf_norm(const Eigen::VectorXd& v) {
  return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
}

struct Residuals {
  double pri_abs = 0, dua_abs = 0;
  double pri_rel = 0, dua_rel = 0;  // scaled by problem magnitudes
};

Residuals kkt_residuals(const CompiledQP& qp, const StackedProblem& sp,
                        const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  Residuals r;
  Eigen::VectorXd Ax = sp.A * x;
  Eigen::VectorXd viol =
      (sp.l - Ax).cwiseMax(0.0).cwiseMax((Ax - sp.u).cwiseMax(0.0));
  Eigen::VectorXd Qx = qp.Q * x;
  Eigen::VectorXd Aty = sp.A.transpose() * y;
  Eigen::VectorXd stat = Qx + qp.q + Aty;
  r.pri_abs = inf_norm(viol);
  r.dua_abs = inf_norm(stat);
  double pri_scale = std::max(inf_norm(Ax), 1.0);
  double dua_scale = std::max({inf_norm(Qx), inf_norm(Aty), inf_norm(qp.q), 1.0});
  r.pri_rel = r.pri_abs / pri_scale;
  r.dua_rel = r.dua_abs / dua_scale;
  return r;
}

/// Active-set polish: solve the KKT equality system of the rows the iterate
/// says are active, then keep the result only if it improves the residuals.
bool polish(const CompiledQP& qp, const StackedProblem& sp, Eigen::VectorXd& x,
            Eigen::VectorXd& y, double tol) {
  long m = sp.A.rows();
  std::vector<long> low, up;
  Eigen::VectorXd Ax = sp.A * x;
  double eps_act = std::sqrt(std::max(tol, 1e-14));
  for (long i = 0; i < m; ++i) {
    if (sp.l[i] == sp.u[i]) {
      low.push_back(i);
      continue;
    }
    bool lact = std::isfinite(sp.l[i]) &&
                (y[i] < -eps_act || Ax[i] - sp.l[i] < eps_act);
    bool uact = std::isfinite(sp.u[i]) &&
                (y[i] > eps_act || sp.u[i] - Ax[i] < eps_act);
    if (lact && uact) {
      if (y[i] >= 0)
        up.push_back(i);
      else
        low.push_back(i);
    } else if (lact) {
      low.push_back(i);
    } else if (uact) {
      up.push_back(i);
    }
  }
  long na = static_cast<long>(low.size() + up.size());
  Eigen::MatrixXd K(qp.n + na, qp.n + na);
  K.setZero();
  K.topLeftCorner(qp.n, qp.n) = qp.Q;
  // tiny regularizer keeps the KKT system solvable when Q is singular on the
  // active manifold
  K.topLeftCorner(qp.n, qp.n).diagonal().array() += 1e-12;
  Eigen::VectorXd rhs(qp.n + na);
  rhs.head(qp.n) = -qp.q;
  long r = 0;
  for (long i : low) {
    K.block(qp.n + r, 0, 1, qp.n) = sp.A.row(i);
    K.block(0, qp.n + r, qp.n, 1) = sp.A.row(i).transpose();
    rhs[qp.n + r] = sp.l[i];
    ++r;
  }
  for (long i : up) {
    K.block(qp.n + r, 0, 1, qp.n) = sp.A.row(i);
    K.block(0, qp.n + r, qp.n, 1) = sp.A.row(i).transpose();
    rhs[qp.n + r] = sp.u[i];
    ++r;
  }
  K.bottomRightCorner(na, na).diagonal().array() -= 1e-12;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
  if (!lu.isInvertible()) return false;
  Eigen::VectorXd sol = lu.solve(rhs);

  Eigen::VectorXd xp = sol.head(qp.n);
  Eigen::VectorXd yp = Eigen::VectorXd::Zero(m);
  r = 0;
  for (long i : low) yp[i] += sol[qp.n + r++];
  for (long i : up) yp[i] += sol[qp.n + r++];

  Residuals before = kkt_residuals(qp, sp, x, y);
  Residuals after = kkt_residuals(qp, sp, xp, yp);
  if (std::max(after.pri_rel, after.dua_rel) <=
      std::max(before.pri_rel, before.dua_rel)) {
    x = xp;
    y = yp;
    return true;
  }
  return false;
}

double complementarity(const StackedProblem& sp, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& y) {
  Eigen::VectorXd Ax = sp.A * x;
  double worst = 0.0;
  for (long i = 0; i < sp.A.rows(); ++i) {
    if (sp.l[i] == sp.u[i]) continue;
    if (y[i] > 0 && std::isfinite(sp.u[i]))
      worst = std::max(worst, y[i] * std::abs(sp.u[i] - Ax[i]));
    else if (y[i] < 0 && std::isfinite(sp.l[i]))
      worst = std::max(worst, -y[i] * std::abs(Ax[i] - sp.l[i]));
  }
  double scale = std::max(1.0, inf_norm(y) * std::max(1.0, inf_norm(Ax)));
  return worst / scale;
}

}  // namespace

QPSolution solve_qp(const CompiledQP& qp, double tol, long max_iter,
                    SolverCache* cache) {
  if (tol <= 0) throw std::invalid_argument("solve_qp: tol must be > 0");

  StackedProblem sp = stack_rows(qp);
  const long m = sp.A.rows();
  const double sigma = 1e-6;
  const double alpha = 1.6;

  SolverCache local;
  SolverCache& st = cache ? *cache : local;
  if (!st.valid || st.x.size() != qp.n || st.y.size() != m) {
    st.x = Eigen::VectorXd::Zero(qp.n);
    st.y = Eigen::VectorXd::Zero(m);
    // zero row-iterate clamped into the box so the first step is sane
    st.zrow = Eigen::VectorXd::Zero(m).cwiseMax(sp.l).cwiseMin(sp.u);
    st.rho_hat = 0.1;
    st.valid = true;
  }

  Eigen::VectorXd x = st.x, y = st.y, zrow = st.zrow;
  double rho_hat = st.rho_hat;

  auto rho_row = [&](double base) {
    return (sp.rho_scale * base).eval();
  };
  Eigen::VectorXd rho_vec = rho_row(rho_hat);

  auto refactor = [&](double rh) {
    if (st.lu_valid && st.lu_rho_hat == rh && st.lu_q.size() == qp.Q.size() &&
        (st.lu_q.array() == qp.Q.array()).all()) {
      return;
    }
    Eigen::MatrixXd K(qp.n + m, qp.n + m);
    K.setZero();
    K.topLeftCorner(qp.n, qp.n) = qp.Q;
    K.topLeftCorner(qp.n, qp.n).diagonal().array() += sigma;
    K.topRightCorner(qp.n, m) = sp.A.transpose();
    K.bottomLeftCorner(m, qp.n) = sp.A;
    K.bottomRightCorner(m, m) =
        (-(sp.rho_scale * rh).cwiseInverse()).asDiagonal();
    st.lu.compute(K);
    st.lu_valid = true;
    st.lu_rho_hat = rh;
    st.lu_q = qp.Q;
  };
  refactor(rho_hat);

  QPSolution out;
  long stall = 0;
  double stall_y0 = 0.0;

  Eigen::VectorXd rhs(qp.n + m), sol(qp.n + m);
  for (long it = 1; it <= max_iter; ++it) {
    rhs.head(qp.n) = sigma * x - qp.q;
    rhs.tail(m) = zrow - y.cwiseQuotient(rho_vec);
    sol = st.lu.solve(rhs);

    Eigen::VectorXd xt = sol.head(qp.n);
    Eigen::VectorXd zt = zrow + (sol.tail(m) - y).cwiseQuotient(rho_vec);

    Eigen::VectorXd x_next = alpha * xt + (1.0 - alpha) * x;
    Eigen::VectorXd z_relax = alpha * zt + (1.0 - alpha) * zrow;
    Eigen::VectorXd z_next =
        (z_relax + y.cwiseQuotient(rho_vec)).cwiseMax(sp.l).cwiseMin(sp.u);
    Eigen::VectorXd y_next = y + rho_vec.cwiseProduct(z_relax - z_next);

    x = x_next;
    zrow = z_next;
    y = y_next;

    bool check = (it % 10 == 0) || it == max_iter;
    if (!check) continue;

    Residuals res = kkt_residuals(qp, sp, x, y);
    if (res.pri_rel <= tol && res.dua_rel <= tol) {
      out.status = QPStatus::optimal;
      out.iterations = it;
      break;
    }

    // declared-infeasible heuristic: primal residual pinned above 1e-3 while
    // the dual keeps growing
    if (res.pri_abs > 1e-3) {
      if (stall == 0) stall_y0 = inf_norm(y);
      stall += 10;
      if (stall >= 5000 && inf_norm(y) > 10.0 * (stall_y0 + 1.0)) {
        out.status = QPStatus::infeasible;
        out.iterations = it;
        break;
      }
    } else {
      stall = 0;
    }

    if (it % 50 == 0) {
      double ratio = std::sqrt((res.pri_rel + 1e-16) / (res.dua_rel + 1e-16));
      if (ratio > 5.0 || ratio < 0.2) {
        rho_hat = std::clamp(rho_hat * ratio, 1e-6, 1e6);
        rho_vec = rho_row(rho_hat);
        refactor(rho_hat);
      }
    }
    if (it == max_iter) {
      out.status = QPStatus::iteration_limit;
      out.iterations = it;
    }
  }
  if (out.iterations == 0) {
    out.status = QPStatus::iteration_limit;
    out.iterations = max_iter;
  }

  if (out.status == QPStatus::optimal) {
    out.polished = polish(qp, sp, x, y, tol);
  }

  st.x = x;
  st.y = y;
  st.zrow = zrow;
  st.rho_hat = rho_hat;

  out.primal = x;
  out.objective = qp.objective_at(x);
  Residuals res = kkt_residuals(qp, sp, x, y);
  out.kkt_residual = std::max({res.pri_rel, res.dua_rel, complementarity(sp, x, y)});
  return out;
}

bool pin_public_to(CompiledQP& qp, const PlanTensor& plan) {
  const VarSlice& pub = qp.public_slice();
  if (pub.count != plan.size()) {
    throw DimsMismatch("eval_private: plan dims do not match the public variable");
  }
  for (long k = 0; k < pub.count; ++k) {
    long col = pub.offset + k;
    // a plan outside the variable's own box has no completion at all
    if (plan[k] < qp.lb[col] - 1e-9 || plan[k] > qp.ub[col] + 1e-9) return false;
    qp.lb[col] = plan[k];
    qp.ub[col] = plan[k];
  }
  return true;
}

PrivateValue eval_private(const FormulationIR& ir, const PlanTensor& plan,
                          double tol) {
  CompiledQP qp = compile_base(ir);
  PrivateValue pv;
  if (!pin_public_to(qp, plan)) {
    pv.status = QPStatus::infeasible;
    return pv;
  }
  QPSolution sol = solve_qp(qp, tol, 50000);
  pv.status = sol.status;
  if (sol.status == QPStatus::optimal) pv.value = sol.objective;
  return pv;
}

}  // namespace optiloop
