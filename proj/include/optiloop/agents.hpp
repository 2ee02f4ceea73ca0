#pragma once

#include "optiloop/core.hpp"
#include "optiloop/formulation.hpp"
#include "optiloop/qpsolver.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace optiloop {

struct SolveFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Reported objective decomposition of one local solve:
///   augmented = private - price + prox.
struct ObjDecomp {
  double private_cost = 0.0;
  double price = 0.0;
  double prox = 0.0;
  double augmented() const { return private_cost - price + prox; }
};

struct AgentResponse {
  PlanTensor proposal;
  std::optional<ObjDecomp> decomp;
  QPStatus status = QPStatus::optimal;
  bool ok() const { return status == QPStatus::optimal; }
};

/// The black-box party contract: solve(z, lambda, rho) -> (proposal, decomp),
/// plus a private-value probe used by evidence checks and metrics.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual const std::string& name() const = 0;
  virtual AgentResponse solve(const PlanTensor& z, const PlanTensor& lambda,
                              const PlanTensor& rho) const = 0;
  virtual PrivateValue private_value(const PlanTensor& plan) const = 0;
};

/// Candidate agent backed by a validated formulation IR. Solves are pure in
/// their inputs; the internal caches only reuse factorizations and warm
/// starts, deterministically.
class IrAgent : public Agent {
 public:
  IrAgent(std::string name, FormulationIR ir, double tol = 1e-8);

  const std::string& name() const override { return name_; }
  const FormulationIR& ir() const { return ir_; }

  AgentResponse solve(const PlanTensor& z, const PlanTensor& lambda,
                      const PlanTensor& rho) const override;
  PrivateValue private_value(const PlanTensor& plan) const override;

 private:
  std::string name_;
  FormulationIR ir_;
  double tol_;
  CompiledQP base_;
  mutable SolverCache solve_cache_;
  mutable SolverCache eval_cache_;
};

struct CounterpartyParams {
  double holding_cost = 0.4;
  double backlog_penalty = 2.0;
  double terminal_weight = 1.0;
  std::vector<double> safety_stock{10.0};   // scalar broadcast, or one per (item, node)
  std::vector<double> demand;               // (item, node, period) row-major
  std::vector<double> initial_inventory;    // (item, node); empty = zeros
};

/// Retail inventory-control model: purchase orders arrive as the public
/// plan, inventory and backlog absorb them against demand, with holding and
/// backlog costs and a quadratic terminal pull toward the safety stock.
FormulationIR counterparty_ir(const CounterpartyParams& p, const Dims& dims);

std::shared_ptr<IrAgent> make_counterparty(const CounterpartyParams& p, const Dims& dims);

/// Contract-level entry points; validate shapes and rho positivity before
/// dispatching to the agent.
AgentResponse agent_solve(const Agent& agent, const PlanTensor& z,
                          const PlanTensor& lambda, const PlanTensor& rho);

AgentResponse counterparty_solve(const CounterpartyParams& params, const Dims& dims,
                                 const PlanTensor& z, const PlanTensor& lambda,
                                 const PlanTensor& rho);

}  // namespace optiloop
