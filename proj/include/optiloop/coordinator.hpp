#pragma once

#include "optiloop/agents.hpp"
#include "optiloop/core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace optiloop {

enum class CoordinationMode { verification, evaluation };

std::string coordination_mode_name(CoordinationMode m);
CoordinationMode coordination_mode_from_name(const std::string& s);

struct CoordinationConfig {
  CoordinationMode mode = CoordinationMode::verification;
  long max_iter = 300;  // 300 in verification, 2000 in evaluation
  double primal_tol = 1e-4;
  double dual_tol = 1e-4;
  bool adapt = true;
  PlanTensor z0;
  PlanTensor lambda0;
  PlanTensor rho0;
  std::vector<std::string> agent_names;

  static CoordinationConfig defaults(const Dims& dims, CoordinationMode mode);
};

/// One completed protocol iteration. `rho` is the penalty in effect while
/// the iteration's updates ran (adaptation applies afterwards).
struct IterationRecord {
  long k = 0;  // 1-based
  std::vector<PlanTensor> proposals;
  std::vector<ObjDecomp> decomps;
  PlanTensor z;
  std::vector<PlanTensor> lambda;
  PlanTensor rho;
  double r = 0.0;
  double s = 0.0;
};

enum class TerminationReason { converged, iteration_cap, agent_failure };

std::string termination_reason_name(TerminationReason r);
TerminationReason termination_reason_from_name(const std::string& s);

struct AgentFailureInfo {
  long k = 0;
  int agent_index = -1;
  std::string what;
};

struct CoordinationTrajectory {
  CoordinationConfig config;
  std::vector<IterationRecord> records;
  TerminationReason reason = TerminationReason::iteration_cap;
  std::optional<AgentFailureInfo> failure;

  const IterationRecord& final_record() const { return records.back(); }
};

PlanTensor z_update(const std::vector<PlanTensor>& proposals);

PlanTensor lambda_update(const PlanTensor& lambda, const PlanTensor& rho,
                         const PlanTensor& z_new, const PlanTensor& proposal);

/// r = sqrt(sum_m ||x_m - z_new||^2);  s = sqrt(M) * ||rho . (z_new - z_old)||.
std::pair<double, double> residuals(const std::vector<PlanTensor>& proposals,
                                    const PlanTensor& z_new, const PlanTensor& z_old,
                                    const PlanTensor& rho);

/// Doubles rho when primal progress lags (r > 10 s), halves it when dual
/// progress lags (s > 10 r); the scaling is uniform over the tensor.
PlanTensor adapt_rho(const PlanTensor& rho, double r, double s);

CoordinationTrajectory coord_run(const std::vector<const Agent*>& agents,
                                 const CoordinationConfig& config);

std::string trajectory_to_jsonl(const CoordinationTrajectory& traj);
CoordinationTrajectory trajectory_from_jsonl(const std::string& text);

}  // namespace optiloop
