#include "optiloop/metrics.hpp"

#include "optiloop/qpsolver.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <random>

namespace optiloop {

namespace {

constexpr double kEps = 1e-9;  // denominator guard for near-zero references

PlanTensor uniform_plan(const Dims& dims, double entry) {
  return PlanTensor::constant(dims, std::max(0.0, entry));
}

bool reference_feasible(const FormulationIR& reference, const PlanTensor& plan) {
  return eval_private(reference, plan).feasible();
}

/// Halve until the reference can fulfil the plan; gives up at zero.
PlanTensor make_feasible(const FormulationIR& reference, PlanTensor plan) {
  for (int tries = 0; tries < 40; ++tries) {
    if (reference_feasible(reference, plan)) return plan;
    plan.values() *= 0.5;
  }
  return PlanTensor::zeros(plan.dims());
}

}  // namespace

std::vector<PlanTensor> standard_probes(const ScenarioSpec& scenario,
                                        std::uint64_t seed) {
  const Dims& dims = scenario.dims;
  const double n = static_cast<double>(dims.size());

  double mean_entry = 1.0;
  if (scenario.expectations.total_demand && *scenario.expectations.total_demand > 0) {
    mean_entry = *scenario.expectations.total_demand / n;
  }

  double cap_entry = 2.0 * mean_entry;
  double cap_min = std::numeric_limits<double>::infinity();
  for (const auto& f : scenario.fields) {
    if (f.role != FieldRoleKind::capacity) continue;
    for (double v : f.data) cap_min = std::min(cap_min, v);
  }
  if (std::isfinite(cap_min)) {
    cap_entry = 0.8 * cap_min / static_cast<double>(dims.nodes);
  }

  std::vector<PlanTensor> probes;
  probes.push_back(PlanTensor::zeros(dims));
  probes.push_back(make_feasible(scenario.reference, uniform_plan(dims, mean_entry)));
  probes.push_back(make_feasible(scenario.reference, uniform_plan(dims, cap_entry)));

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> u(0.0, 1.5 * mean_entry);
  for (int rep = 0; rep < 2; ++rep) {
    PlanTensor p(dims);
    for (long k = 0; k < p.size(); ++k) p[k] = u(rng);
    probes.push_back(make_feasible(scenario.reference, std::move(p)));
  }
  return probes;
}

std::pair<bool, double> objective_metrics(const FormulationIR& candidate,
                                          const FormulationIR& reference,
                                          const std::vector<PlanTensor>& probes,
                                          std::vector<double>* rel_errors) {
  if (probes.empty()) throw std::invalid_argument("objective_metrics: no probes");

  std::vector<double> errors;
  for (const auto& probe : probes) {
    PrivateValue ref = eval_private(reference, probe);
    if (!ref.feasible()) continue;  // probes are reference-feasible by construction
    PrivateValue cand = eval_private(candidate, probe);
    double rel;
    if (!cand.feasible()) {
      rel = 1.0;
    } else {
      double diff = std::abs(cand.value - ref.value);
      // absolute deadband: solver noise at near-zero references is not error
      rel = diff <= 1e-7 ? 0.0 : diff / std::max(std::abs(ref.value), kEps);
    }
    errors.push_back(rel);
  }
  if (errors.empty()) return {false, 100.0};

  bool match = true;
  double gap = 0.0;
  for (double e : errors) {
    if (!(e < 1e-3)) match = false;
    gap += std::min(e, 1.0);
  }
  gap = gap / static_cast<double>(errors.size()) * 100.0;
  if (rel_errors) *rel_errors = errors;
  return {match, gap};
}

std::pair<bool, double> social_metrics(const PlanTensor& final_z,
                                       const FormulationIR& vendor_ir,
                                       const CounterpartyParams& cp, const Dims& dims) {
  CentralizedSolution opt = solve_centralized(vendor_ir, cp, dims);
  if (opt.status != QPStatus::optimal) return {false, 100.0};

  PrivateValue fv = eval_private(vendor_ir, final_z);
  PrivateValue fc = eval_private(counterparty_ir(cp, dims), final_z);
  if (!fv.feasible() || !fc.feasible()) return {false, 100.0};

  double coordinated = fv.value + fc.value;
  double gap = std::min(std::abs(coordinated - opt.objective) /
                            std::max(std::abs(opt.objective), kEps),
                        1.0) *
               100.0;
  return {gap < 0.1, gap};
}

nlohmann::json metrics_to_json(const MetricsReport& m) {
  nlohmann::json j;
  j["obj_match"] = m.obj_match;
  j["obj_gap_pct"] = m.obj_gap;
  j["social_match"] = m.social_match;
  j["social_gap_pct"] = m.social_gap;
  j["probe_rel_errors"] = m.probe_rel_errors;
  j["efficiency"] = nlohmann::json{
      {"verification_episodes", m.efficiency.verification_episodes},
      {"repair_count", m.efficiency.repair_count},
      {"wall_time_sec", m.efficiency.wall_time_sec}};
  return j;
}

}  // namespace optiloop
