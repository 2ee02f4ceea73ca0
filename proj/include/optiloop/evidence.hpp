#pragma once

#include "optiloop/agents.hpp"
#include "optiloop/coordinator.hpp"
#include "optiloop/formulation.hpp"
#include "optiloop/scenarios.hpp"

#include <nlohmann/json_fwd.hpp>

#include <map>
#include <string>
#include <vector>

namespace optiloop {

enum class CheckSource { behavioral, static_analysis };
enum class Severity { hard, soft, informational, warning };

std::string check_source_name(CheckSource s);
std::string severity_name(Severity s);

struct CheckOutcome {
  int id = 0;  // 1..11
  std::string name;
  CheckSource source = CheckSource::behavioral;
  Severity severity = Severity::informational;
  bool fired = false;
  bool skipped = false;
  std::string detail;
  std::map<std::string, double> metrics;

  static CheckOutcome skip(int id, const std::string& reason);
};

struct EvidenceReport {
  std::vector<CheckOutcome> outcomes;  // exactly 11, ordered by check id
  bool has_fail = false;               // any fired hard outcome

  const CheckOutcome& check(int id) const;
  int hard_fired_count() const;
  /// A candidate counts as detected when any non-informational check fired.
  bool detected() const;
};

enum class EvidenceMode { full, static_only, behavioral_only };

std::string evidence_mode_name(EvidenceMode m);
EvidenceMode evidence_mode_from_name(const std::string& s);

// --- behavioral checks ------------------------------------------------------------

/// #1 utility-sign consistency: negative private cost at a probe, or a
/// pure-variable-cost model getting cheaper as work scales up.
CheckOutcome check_utility_sign(const Agent& agent, const ScenarioSpec& scenario,
                                const std::vector<PlanTensor>& probes);

/// #2 price-response sanity: bump the dual on 4 sampled components; a
/// majority moving down under a positive price is a hard fail.
CheckOutcome check_price_response(const Agent& agent, const ScenarioSpec& scenario,
                                  std::uint64_t seed);

/// #3 convergence-trajectory classification over the primal residual series.
CheckOutcome check_convergence(const CoordinationTrajectory& traj);

/// #4 degenerate plan: share of near-zero entries in the candidate's final
/// proposal, gated on the scenario expecting nontrivial fulfilment.
CheckOutcome check_degenerate_plan(const CoordinationTrajectory& traj,
                                   const ScenarioSpec& scenario);

/// #5 social-gradient perturbation along one seeded direction near consensus.
CheckOutcome check_social_gradient(const Agent& agent, const Agent& counterparty,
                                   const PlanTensor& z_probe, double step,
                                   std::uint64_t seed);

/// #8 marginal-cost consistency between two pinned consensus levels.
CheckOutcome check_marginal_cost(const Agent& agent, const ScenarioSpec& scenario,
                                 double low = 30.0, double high = 80.0);

/// #9 demand coverage of the final consensus plan.
CheckOutcome check_demand_coverage(const CoordinationTrajectory& traj,
                                   const ScenarioSpec& scenario);

/// #10 dual-price outliers and tail growth.
CheckOutcome check_dual_outliers(const CoordinationTrajectory& traj);

// --- assembly ---------------------------------------------------------------------

EvidenceReport extract_evidence(const CoordinationTrajectory& traj,
                                const FormulationIR& candidate_ir,
                                const ScenarioSpec& scenario, std::uint64_t seed,
                                EvidenceMode mode = EvidenceMode::full);

nlohmann::json evidence_to_json(const EvidenceReport& rep);
EvidenceReport evidence_from_json(const nlohmann::json& j);

/// Fixed-width table mirroring the check list (id, source, severity, status).
std::string render_evidence_table(const EvidenceReport& rep);

}  // namespace optiloop
