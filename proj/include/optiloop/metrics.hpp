#pragma once

#include "optiloop/core.hpp"
#include "optiloop/formulation.hpp"
#include "optiloop/scenarios.hpp"

#include <nlohmann/json_fwd.hpp>

#include <utility>
#include <vector>

namespace optiloop {

struct EfficiencyCounters {
  int verification_episodes = 0;
  int repair_count = 0;
  double wall_time_sec = 0.0;  // excluded from byte-reproducibility comparisons
};

struct MetricsReport {
  bool obj_match = false;
  double obj_gap = 100.0;  // percent in [0, 100]
  bool social_match = false;
  double social_gap = 100.0;
  std::vector<double> probe_rel_errors;
  EfficiencyCounters efficiency;
};

/// Reference consensus plans probed by the objective metrics: the zero plan,
/// a uniform plan at the mean-demand level, a uniform plan at 80% of the
/// tightest capacity, and two seeded random plans. Every non-zero probe is
/// halved until the reference model can fulfil it.
std::vector<PlanTensor> standard_probes(const ScenarioSpec& scenario,
                                        std::uint64_t seed);

/// Per-probe relative private-value error of the candidate against the
/// reference, 0.1% match rule, gap capped at 100%.
std::pair<bool, double> objective_metrics(const FormulationIR& candidate,
                                          const FormulationIR& reference,
                                          const std::vector<PlanTensor>& probes,
                                          std::vector<double>* rel_errors = nullptr);

/// Coordinated value f_vendor(z) + f_counterparty(z) against the optimum of
/// the centralized joint problem.
std::pair<bool, double> social_metrics(const PlanTensor& final_z,
                                       const FormulationIR& vendor_ir,
                                       const CounterpartyParams& cp, const Dims& dims);

nlohmann::json metrics_to_json(const MetricsReport& m);

}  // namespace optiloop
