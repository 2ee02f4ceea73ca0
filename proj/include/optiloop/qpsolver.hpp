#pragma once

#include "optiloop/core.hpp"
#include "optiloop/formulation.hpp"

#include <Eigen/Dense>

#include <map>
#include <string>
#include <vector>

namespace optiloop {

struct CompileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class QPStatus { optimal, infeasible, iteration_limit };

std::string qp_status_name(QPStatus s);

struct VarSlice {
  long offset = 0;
  long count = 0;
  std::vector<int> sizes;  // per-dimension extents
};

/// Dense convex QP: minimize 0.5 x'Qx + q'x + constant subject to the listed
/// rows and variable bounds. Q is symmetric PSD by construction from a
/// validated IR (diagonal squares plus the proximal expansion).
struct CompiledQP {
  long n = 0;
  Eigen::MatrixXd Q;
  Eigen::VectorXd q;
  double constant = 0.0;

  Eigen::MatrixXd A;  // one row per instantiated constraint
  std::vector<Relation> relations;
  Eigen::VectorXd rhs;

  Eigen::VectorXd lb, ub;

  std::map<std::string, VarSlice> vars;  // IR variable -> column block
  std::string public_var;

  const VarSlice& public_slice() const { return vars.at(public_var); }
  double objective_at(const Eigen::VectorXd& x) const {
    return 0.5 * x.dot(Q * x) + q.dot(x) + constant;
  }
};

struct QPSolution {
  QPStatus status = QPStatus::iteration_limit;
  Eigen::VectorXd primal;
  double objective = 0.0;   // includes the constant offset
  double kkt_residual = 0.0;
  long iterations = 0;
  bool polished = false;
};

/// Warm-start and factorization reuse across related solves. All state is
/// deterministic, so reusing a cache keeps full-run reproducibility.
struct SolverCache {
  bool valid = false;
  Eigen::VectorXd x, zrow, y;
  double rho_hat = 0.1;

  bool lu_valid = false;
  double lu_rho_hat = -1.0;
  Eigen::MatrixXd lu_q;  // Q snapshot the factorization was built for
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
};

/// Objective and constraints of the IR itself (the private model), without
/// any consensus terms.
CompiledQP compile_base(const FormulationIR& ir);

/// Augmented local subproblem: private objective minus the price term plus
/// the quadratic proximal pull toward z. The constant offset (including
/// 0.5*sum(rho z^2)) is tracked so reported objectives decompose exactly.
CompiledQP compile_subproblem(const FormulationIR& ir, const PlanTensor& z,
                              const PlanTensor& lambda, const PlanTensor& rho);

QPSolution solve_qp(const CompiledQP& qp, double tol = 1e-8, long max_iter = 50000,
                    SolverCache* cache = nullptr);

struct PrivateValue {
  QPStatus status = QPStatus::infeasible;
  double value = 0.0;
  bool feasible() const { return status == QPStatus::optimal; }
};

/// Tightens the public block's bounds to `plan`; false when the plan falls
/// outside the variable's own box (no completion exists).
bool pin_public_to(CompiledQP& qp, const PlanTensor& plan);

/// f(plan): pins the public variable to `plan` and minimizes over the
/// private variables. status=infeasible when no private completion exists.
PrivateValue eval_private(const FormulationIR& ir, const PlanTensor& plan,
                          double tol = 1e-8);

}  // namespace optiloop
