#include "optiloop/agents.hpp"

#include <cmath>

namespace optiloop {

IrAgent::IrAgent(std::string name, FormulationIR ir, double tol)
    : name_(std::move(name)), ir_(std::move(ir)), tol_(tol) {
  base_ = compile_base(ir_);
}

AgentResponse IrAgent::solve(const PlanTensor& z, const PlanTensor& lambda,
                             const PlanTensor& rho) const {
  CompiledQP qp = base_;
  const VarSlice& pub = qp.public_slice();
  if (pub.count != z.size()) {
    throw DimsMismatch("IrAgent::solve: plan dims do not match the public variable");
  }
  for (long k = 0; k < pub.count; ++k) {
    long col = pub.offset + k;
    double rk = rho[k];
    qp.Q(col, col) += rk;
    qp.q[col] += -lambda[k] - rk * z[k];
    qp.constant += 0.5 * rk * z[k] * z[k];
  }

  QPSolution sol = solve_qp(qp, tol_, 50000, &solve_cache_);

  AgentResponse resp;
  resp.status = sol.status;
  if (sol.status != QPStatus::optimal) {
    resp.proposal = PlanTensor(z.dims());
    return resp;
  }

  // clamp solver fuzz on the public block into bounds before reporting
  Eigen::VectorXd x = sol.primal;
  for (long k = 0; k < pub.count; ++k) {
    long col = pub.offset + k;
    x[col] = std::clamp(x[col], qp.lb[col], qp.ub[col]);
    if (qp.lb[col] <= 0.0 && std::abs(x[col]) < 1e-9) x[col] = 0.0;
  }

  PlanTensor proposal(z.dims(), x.segment(pub.offset, pub.count).array());
  double augmented = qp.objective_at(x);

  ObjDecomp d;
  d.price = inner(lambda, proposal);
  d.prox = 0.5 * (rho.values() * (proposal.values() - z.values()).square()).sum();
  d.private_cost = augmented + d.price - d.prox;

  resp.proposal = std::move(proposal);
  resp.decomp = d;
  return resp;
}

PrivateValue IrAgent::private_value(const PlanTensor& plan) const {
  CompiledQP qp = base_;
  PrivateValue pv;
  if (!pin_public_to(qp, plan)) {
    pv.status = QPStatus::infeasible;
    return pv;
  }
  QPSolution sol = solve_qp(qp, tol_, 50000, &eval_cache_);
  pv.status = sol.status;
  if (sol.status == QPStatus::optimal) pv.value = sol.objective;
  return pv;
}

// --- counterparty --------------------------------------------------------------

FormulationIR counterparty_ir(const CounterpartyParams& p, const Dims& dims) {
  if (p.holding_cost < 0 || p.backlog_penalty < 0 || p.terminal_weight < 0) {
    throw std::invalid_argument("counterparty_ir: h, b, w must be >= 0");
  }
  const long n_ij = static_cast<long>(dims.items) * dims.nodes;
  const long n = dims.size();

  std::vector<double> demand = p.demand;
  if (demand.empty()) demand.assign(static_cast<size_t>(n), 0.0);
  if (static_cast<long>(demand.size()) != n) {
    throw std::invalid_argument("counterparty_ir: demand must have A*J*T entries");
  }
  for (double d : demand) {
    if (d < 0) throw std::invalid_argument("counterparty_ir: demand must be >= 0");
  }

  std::vector<double> inv0 = p.initial_inventory;
  if (inv0.empty()) inv0.assign(static_cast<size_t>(n_ij), 0.0);
  if (static_cast<long>(inv0.size()) != n_ij) {
    throw std::invalid_argument("counterparty_ir: initial_inventory must have A*J entries");
  }

  std::vector<double> sstar = p.safety_stock;
  if (sstar.size() == 1) sstar.assign(static_cast<size_t>(n_ij), p.safety_stock[0]);
  if (static_cast<long>(sstar.size()) != n_ij) {
    throw std::invalid_argument("counterparty_ir: safety_stock must be scalar or A*J");
  }

  std::vector<double> is_first(static_cast<size_t>(dims.periods), 0.0);
  is_first[0] = 1.0;

  FormulationIR ir;
  ir.name = "counterparty_retail";
  ir.sets = {IndexSet{"item", dims.items, DimKind::item},
             IndexSet{"node", dims.nodes, DimKind::node},
             IndexSet{"period", dims.periods, DimKind::period}};

  ir.parameters.push_back(
      Parameter{"demand", {"item", "node", "period"}, "cp.demand", demand});
  ir.parameters.push_back(
      Parameter{"initial_inventory", {"item", "node"}, "cp.initial_inventory", inv0});
  ir.parameters.push_back(
      Parameter{"safety_stock", {"item", "node"}, "cp.safety_stock", sstar});
  ir.parameters.push_back(
      Parameter{"holding_cost", {}, "cp.holding_cost", {p.holding_cost}});
  ir.parameters.push_back(
      Parameter{"backlog_penalty", {}, "cp.backlog_penalty", {p.backlog_penalty}});
  ir.parameters.push_back(
      Parameter{"terminal_weight", {}, "cp.terminal_weight", {p.terminal_weight}});
  ir.parameters.push_back(Parameter{"is_first", {"period"}, "cp.is_first", is_first});

  Variable po{"po", {"item", "node", "period"}, Visibility::public_decision, 0.0,
              std::numeric_limits<double>::infinity(), "purchase_order"};
  Variable inv{"inv", {"item", "node", "period"}, Visibility::private_decision, 0.0,
               std::numeric_limits<double>::infinity(), "inventory"};
  Variable bk{"backlog", {"item", "node", "period"}, Visibility::private_decision, 0.0,
              std::numeric_limits<double>::infinity(), "backlog"};
  ir.variables = {po, inv, bk};

  // inv - backlog telescopes cumulative (po - demand) from the initial stock
  LinearConstraint bal;
  bal.name = "inventory_balance";
  bal.quantifiers = {{"i", "item"}, {"j", "node"}, {"t", "period"}};
  auto one = CoefExpr::lit(1.0);
  auto minus = CoefExpr::lit(-1.0);
  bal.lhs = {
      {one, {"inv", {IndexRef::sym("i"), IndexRef::sym("j"), IndexRef::sym("t")}}},
      {minus, {"backlog", {IndexRef::sym("i"), IndexRef::sym("j"), IndexRef::sym("t")}}},
      {minus, {"inv", {IndexRef::sym("i"), IndexRef::sym("j"), IndexRef::sym("t", -1)}}},
      {one, {"backlog", {IndexRef::sym("i"), IndexRef::sym("j"), IndexRef::sym("t", -1)}}},
      {minus, {"po", {IndexRef::sym("i"), IndexRef::sym("j"), IndexRef::sym("t")}}},
  };
  bal.relation = Relation::eq;
  CoefExpr rhs_inv0;
  rhs_inv0.literal = 1.0;
  rhs_inv0.params = {ParamRef{"is_first", {IndexRef::sym("t")}},
                     ParamRef{"initial_inventory", {IndexRef::sym("i"), IndexRef::sym("j")}}};
  CoefExpr rhs_dem;
  rhs_dem.literal = -1.0;
  rhs_dem.params = {ParamRef{"demand", {IndexRef::sym("i"), IndexRef::sym("j"), IndexRef::sym("t")}}};
  bal.rhs.terms = {rhs_inv0, rhs_dem};
  ir.constraints.push_back(bal);

  const int last = dims.periods - 1;
  auto ij_last = [&](int) {
    return std::vector<IndexRef>{IndexRef::sym("i"), IndexRef::sym("j"), IndexRef::lit(last)};
  };

  ObjectiveTerm holding;
  holding.name = "holding";
  holding.kind = TermKind::linear_var;
  holding.coef = CoefExpr::param("holding_cost");
  holding.var_a = VarRef{"inv", {IndexRef::sym("i"), IndexRef::sym("j"), IndexRef::sym("t")}};
  ir.objective.push_back(holding);

  ObjectiveTerm backlog;
  backlog.name = "backlog";
  backlog.kind = TermKind::linear_var;
  backlog.coef = CoefExpr::param("backlog_penalty");
  backlog.var_a = VarRef{"backlog", {IndexRef::sym("i"), IndexRef::sym("j"), IndexRef::sym("t")}};
  ir.objective.push_back(backlog);

  // w * (inv_T - s*)^2 expanded into square, linear and constant pieces
  ObjectiveTerm term_sq;
  term_sq.name = "terminal_sq";
  term_sq.kind = TermKind::quadratic_var;
  term_sq.coef = CoefExpr::param("terminal_weight");
  term_sq.var_a = VarRef{"inv", ij_last(0)};
  term_sq.var_b = VarRef{"inv", ij_last(0)};
  ir.objective.push_back(term_sq);

  ObjectiveTerm term_lin;
  term_lin.name = "terminal_lin";
  term_lin.kind = TermKind::linear_var;
  term_lin.weight = -2.0;
  term_lin.coef.literal = 1.0;
  term_lin.coef.params = {ParamRef{"terminal_weight", {}},
                          ParamRef{"safety_stock", {IndexRef::sym("i"), IndexRef::sym("j")}}};
  term_lin.var_a = VarRef{"inv", ij_last(0)};
  ir.objective.push_back(term_lin);

  ObjectiveTerm term_const;
  term_const.name = "terminal_const";
  term_const.kind = TermKind::const_data;
  term_const.coef.literal = 1.0;
  term_const.coef.params = {
      ParamRef{"terminal_weight", {}},
      ParamRef{"safety_stock", {IndexRef::sym("i"), IndexRef::sym("j")}},
      ParamRef{"safety_stock", {IndexRef::sym("i"), IndexRef::sym("j")}}};
  ir.objective.push_back(term_const);

  return ir;
}

std::shared_ptr<IrAgent> make_counterparty(const CounterpartyParams& p, const Dims& dims) {
  return std::make_shared<IrAgent>("counterparty", counterparty_ir(p, dims));
}

AgentResponse agent_solve(const Agent& agent, const PlanTensor& z,
                          const PlanTensor& lambda, const PlanTensor& rho) {
  require_same_dims(z, lambda, "agent_solve");
  require_same_dims(z, rho, "agent_solve");
  if ((rho.values() <= 0.0).any()) {
    throw std::invalid_argument("agent_solve: rho must be > 0 elementwise");
  }
  return agent.solve(z, lambda, rho);
}

AgentResponse counterparty_solve(const CounterpartyParams& params, const Dims& dims,
                                 const PlanTensor& z, const PlanTensor& lambda,
                                 const PlanTensor& rho) {
  auto cp = make_counterparty(params, dims);
  return agent_solve(*cp, z, lambda, rho);
}

}  // namespace optiloop
