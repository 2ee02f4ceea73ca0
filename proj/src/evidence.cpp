#include "optiloop/evidence.hpp"

#include "optiloop/metrics.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

namespace optiloop {

namespace {

struct CheckMeta {
  int id;
  const char* name;
  CheckSource source;
  Severity severity;
};

const CheckMeta kChecks[] = {
    {1, "utility_sign", CheckSource::behavioral, Severity::hard},
    {2, "price_response", CheckSource::behavioral, Severity::hard},
    {3, "convergence_trajectory", CheckSource::behavioral, Severity::soft},
    {4, "degenerate_plan", CheckSource::behavioral, Severity::hard},
    {5, "social_gradient", CheckSource::behavioral, Severity::informational},
    {6, "cost_data_antipattern", CheckSource::static_analysis, Severity::hard},
    {7, "decision_variable_audit", CheckSource::static_analysis, Severity::informational},
    {8, "marginal_cost", CheckSource::behavioral, Severity::soft},
    {9, "demand_coverage", CheckSource::behavioral, Severity::informational},
    {10, "dual_outliers", CheckSource::behavioral, Severity::informational},
    {11, "missing_cost_parameters", CheckSource::static_analysis, Severity::hard},
};

const CheckMeta& meta(int id) {
  for (const auto& m : kChecks)
    if (m.id == id) return m;
  throw std::logic_error("unknown check id");
}

CheckOutcome base_outcome(int id) {
  const CheckMeta& m = meta(id);
  CheckOutcome o;
  o.id = m.id;
  o.name = m.name;
  o.source = m.source;
  o.severity = m.severity;
  return o;
}

PlanTensor mean_demand_plan(const ScenarioSpec& scenario) {
  double entry = 1.0;
  if (scenario.expectations.total_demand && *scenario.expectations.total_demand > 0) {
    entry = *scenario.expectations.total_demand /
            static_cast<double>(scenario.dims.size());
  }
  return PlanTensor::constant(scenario.dims, entry);
}

double max_cost_magnitude(const ScenarioSpec& scenario) {
  double m = 0.0;
  for (const auto& f : scenario.fields) {
    if (f.role != FieldRoleKind::cost) continue;
    for (double v : f.data) m = std::max(m, std::abs(v));
  }
  return m;
}

}  // namespace

std::string check_source_name(CheckSource s) {
  return s == CheckSource::behavioral ? "behavioral" : "static";
}

std::string severity_name(Severity s) {
  switch (s) {
    case Severity::hard: return "hard";
    case Severity::soft: return "soft";
    case Severity::informational: return "informational";
    case Severity::warning: return "warning";
  }
  return "?";
}

CheckOutcome CheckOutcome::skip(int id, const std::string& reason) {
  CheckOutcome o = base_outcome(id);
  o.skipped = true;
  o.detail = "skipped: " + reason;
  return o;
}

const CheckOutcome& EvidenceReport::check(int id) const {
  for (const auto& o : outcomes)
    if (o.id == id) return o;
  throw std::out_of_range("no such check in report");
}

int EvidenceReport::hard_fired_count() const {
  int n = 0;
  for (const auto& o : outcomes)
    if (o.fired && o.severity == Severity::hard) ++n;
  return n;
}

bool EvidenceReport::detected() const {
  for (const auto& o : outcomes)
    if (o.fired && o.severity != Severity::informational) return true;
  return false;
}

std::string evidence_mode_name(EvidenceMode m) {
  switch (m) {
    case EvidenceMode::full: return "full";
    case EvidenceMode::static_only: return "static";
    case EvidenceMode::behavioral_only: return "behavioral";
  }
  return "?";
}

EvidenceMode evidence_mode_from_name(const std::string& s) {
  if (s == "full") return EvidenceMode::full;
  if (s == "static" || s == "static_only") return EvidenceMode::static_only;
  if (s == "behavioral" || s == "behavioral_only") return EvidenceMode::behavioral_only;
  throw std::invalid_argument("unknown evidence mode '" + s + "'");
}

// --- check 1 -----------------------------------------------------------------------

CheckOutcome check_utility_sign(const Agent& agent, const ScenarioSpec& scenario,
                                const std::vector<PlanTensor>& probes) {
  CheckOutcome o = base_outcome(1);
  if (scenario.expectations.sense != "cost_min") {
    return CheckOutcome::skip(1, "scenario sense is not cost-minimizing");
  }

  const double tol = 1e-7;
  bool any_feasible = false;
  double zero_value = 0.0;
  bool have_zero = false;
  double best_nontrivial = -std::numeric_limits<double>::infinity();
  double nontrivial_value = 0.0;
  double min_value = std::numeric_limits<double>::infinity();

  for (const auto& probe : probes) {
    PrivateValue v = agent.private_value(probe);
    if (!v.feasible()) continue;
    any_feasible = true;
    min_value = std::min(min_value, v.value);
    double total = probe.sum();
    if (total <= 1e-12) {
      zero_value = v.value;
      have_zero = true;
    } else if (total > best_nontrivial) {
      best_nontrivial = total;
      nontrivial_value = v.value;
    }
  }

  // the agent's own optimum can reveal a flipped cost that pinned probes miss
  try {
    AgentResponse resp =
        agent.solve(mean_demand_plan(scenario), PlanTensor::zeros(scenario.dims),
                    PlanTensor::constant(scenario.dims, 1.0));
    if (resp.ok() && resp.decomp) {
      any_feasible = true;
      min_value = std::min(min_value, resp.decomp->private_cost);
      o.metrics["reported_private_at_optimum"] = resp.decomp->private_cost;
    }
  } catch (const std::exception&) {
    // probe-based evidence still applies
  }

  if (!any_feasible) return CheckOutcome::skip(1, "all probes infeasible");

  o.metrics["min_private_value"] = min_value;
  if (have_zero) o.metrics["zero_probe_value"] = zero_value;

  if (min_value < -tol) {
    o.fired = true;
    std::ostringstream d;
    d << "private cost reaches " << min_value
      << " under a cost-minimizing convention with nonnegative cost data";
    o.detail = d.str();
    return o;
  }
  if (scenario.expectations.pure_variable_cost && have_zero &&
      best_nontrivial > 0.0 && nontrivial_value < zero_value - tol) {
    o.fired = true;
    std::ostringstream d;
    d << "scaled-up plan reports " << nontrivial_value
      << ", below the zero plan's " << zero_value
      << " for a pure variable-cost model";
    o.detail = d.str();
    return o;
  }
  o.detail = "private values consistent with the cost-minimizing convention";
  return o;
}

// --- check 2 -----------------------------------------------------------------------

CheckOutcome check_price_response(const Agent& agent, const ScenarioSpec& scenario,
                                  std::uint64_t seed) {
  CheckOutcome o = base_outcome(2);
  const Dims& dims = scenario.dims;
  const long n = dims.size();
  const double delta = std::max(10.0 * max_cost_magnitude(scenario), 1e-3);
  const double tol = 1e-6;

  PlanTensor z = mean_demand_plan(scenario);
  PlanTensor rho = PlanTensor::constant(dims, 1.0);

  AgentResponse base;
  try {
    base = agent.solve(z, PlanTensor::zeros(dims), rho);
  } catch (const std::exception& e) {
    return CheckOutcome::skip(2, std::string("baseline solve failed: ") + e.what());
  }
  if (!base.ok()) return CheckOutcome::skip(2, "baseline solve failed");

  // sample components without replacement
  std::vector<long> pool(static_cast<size_t>(n));
  for (long k = 0; k < n; ++k) pool[static_cast<size_t>(k)] = k;
  std::mt19937_64 rng(seed ^ 0x51ed2701u);
  int want = static_cast<int>(std::min<long>(4, n));
  std::vector<long> sampled;
  for (int c = 0; c < want; ++c) {
    std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
    size_t at = pick(rng);
    sampled.push_back(pool[at]);
    pool.erase(pool.begin() + static_cast<long>(at));
  }

  int wrong = 0;
  for (long k : sampled) {
    PlanTensor lambda(dims);
    lambda[k] = delta;
    AgentResponse bumped;
    try {
      bumped = agent.solve(z, lambda, rho);
    } catch (const std::exception& e) {
      return CheckOutcome::skip(2, std::string("perturbed solve failed: ") + e.what());
    }
    if (!bumped.ok()) return CheckOutcome::skip(2, "perturbed solve failed");
    if (bumped.proposal[k] < base.proposal[k] - tol) ++wrong;
  }

  int majority = want >= 4 ? 3 : want / 2 + 1;
  o.metrics["sampled"] = want;
  o.metrics["wrong_direction"] = wrong;
  o.metrics["delta"] = delta;
  if (wrong >= majority) {
    o.fired = true;
    std::ostringstream d;
    d << wrong << " of " << want
      << " sampled components moved down under a positive price bump of " << delta;
    o.detail = d.str();
  } else {
    o.detail = "sampled components respond to positive prices in the right direction";
  }
  return o;
}

// --- check 3 -----------------------------------------------------------------------

CheckOutcome check_convergence(const CoordinationTrajectory& traj) {
  CheckOutcome o = base_outcome(3);
  const auto& recs = traj.records;
  if (recs.size() < 5) return CheckOutcome::skip(3, "fewer than 5 iterations recorded");

  if (traj.reason == TerminationReason::converged) {
    o.detail = "class=converged";
    o.metrics["class"] = 0;
    return o;
  }

  const size_t len = recs.size();
  const size_t window = std::min<size_t>(50, len / 2);
  double r_last = recs[len - 1].r;
  double r_first = recs[len - 1 - window].r;
  double rate = std::pow(std::max(r_last, 1e-300) / std::max(r_first, 1e-300),
                         1.0 / static_cast<double>(window));

  int flips = 0, steps = 0;
  for (size_t k = len - window; k < len; ++k) {
    double d1 = recs[k].r - recs[k - 1].r;
    if (k >= len - window + 1) {
      double d0 = recs[k - 1].r - recs[k - 2].r;
      if (d0 * d1 < 0) ++flips;
      ++steps;
    }
  }
  double flip_frac = steps ? static_cast<double>(flips) / steps : 0.0;

  o.metrics["rate"] = rate;
  o.metrics["flip_fraction"] = flip_frac;
  o.metrics["final_r"] = r_last;

  std::string cls;
  if (flip_frac >= 0.4) {
    cls = "oscillating";
    o.fired = true;
  } else if (rate > 0.999) {
    cls = "stagnating";
    o.fired = true;
  } else if (rate > 0.98 && r_last > traj.config.primal_tol) {
    cls = "slow";
  } else {
    cls = "decreasing";
  }
  o.detail = "class=" + cls;
  return o;
}

// --- check 4 -----------------------------------------------------------------------

CheckOutcome check_degenerate_plan(const CoordinationTrajectory& traj,
                                   const ScenarioSpec& scenario) {
  CheckOutcome o = base_outcome(4);
  if (traj.records.empty()) return CheckOutcome::skip(4, "no complete iterations");

  const PlanTensor& final_proposal = traj.final_record().proposals.front();
  long zeros = 0;
  for (long k = 0; k < final_proposal.size(); ++k) {
    if (std::abs(final_proposal[k]) <= 1e-9) ++zeros;
  }
  double frac = static_cast<double>(zeros) / static_cast<double>(final_proposal.size());
  o.metrics["zero_fraction"] = frac;

  if (!scenario.expectations.nontrivial_plan) {
    o.detail = "trivial plan expected by the scenario";
    return o;
  }
  if (frac > 0.8) {
    o.fired = true;
    o.severity = frac >= 1.0 ? Severity::hard : Severity::warning;
    std::ostringstream d;
    d << (frac * 100.0) << "% of final proposal entries are zero while "
      << "nontrivial fulfilment is expected";
    o.detail = d.str();
  } else {
    o.detail = "final proposal carries nontrivial volume";
  }
  return o;
}

// --- check 5 -----------------------------------------------------------------------

CheckOutcome check_social_gradient(const Agent& agent, const Agent& counterparty,
                                   const PlanTensor& z_probe, double step,
                                   std::uint64_t seed) {
  if (step <= 0.0) throw std::invalid_argument("check_social_gradient: step must be > 0");
  CheckOutcome o = base_outcome(5);
  const Dims dims = z_probe.dims();

  // seeded random direction in the volume orthant; a step along +d means
  // asking for more fulfilment overall
  std::mt19937_64 rng(seed ^ 0xa5a5a5a5u);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  PlanTensor dir(dims);
  for (long k = 0; k < dir.size(); ++k) dir[k] = u(rng);
  dir.values() /= norm2(dir);

  auto social = [&](const PlanTensor& z) -> PrivateValue {
    PrivateValue a = agent.private_value(z);
    if (!a.feasible()) return a;
    PrivateValue c = counterparty.private_value(z);
    if (!c.feasible()) return c;
    return PrivateValue{QPStatus::optimal, a.value + c.value};
  };

  PrivateValue s0 = social(z_probe);
  PlanTensor plus(dims, z_probe.values() + step * dir.values());
  PrivateValue sp = social(plus);
  if (!s0.feasible() || !sp.feasible()) {
    return CheckOutcome::skip(5, "perturbed probes infeasible");
  }
  double gradient = (sp.value - s0.value) / step;

  AgentResponse resp;
  try {
    resp = agent.solve(z_probe, PlanTensor::zeros(dims), PlanTensor::constant(dims, 1.0));
  } catch (const std::exception& e) {
    return CheckOutcome::skip(5, std::string("agent solve failed: ") + e.what());
  }
  if (!resp.ok()) return CheckOutcome::skip(5, "agent solve failed");
  double movement = inner(resp.proposal - z_probe, dir);

  double gtol = 1e-6 * std::max(1.0, std::abs(s0.value));
  o.metrics["social_gradient"] = gradient;
  o.metrics["agent_movement"] = movement;

  // descent along this axis is -d when the social objective rises with
  // volume; an agent pulling volume up against that slope is mismatched
  if (gradient > gtol && movement > 1e-6) {
    o.fired = true;
    o.detail = "agent pulls volume up along an axis where the social objective rises";
  } else {
    o.detail = "agent movement consistent with the local social slope";
  }
  return o;
}

// --- check 8 -----------------------------------------------------------------------

CheckOutcome check_marginal_cost(const Agent& agent, const ScenarioSpec& scenario,
                                 double low, double high) {
  CheckOutcome o = base_outcome(8);
  const Dims& dims = scenario.dims;
  const double n = static_cast<double>(dims.size());
  PlanTensor rho = PlanTensor::constant(dims, 1e6);
  PlanTensor zero_lambda = PlanTensor::zeros(dims);

  auto pinned_private = [&](double level) -> std::optional<double> {
    PlanTensor z = PlanTensor::constant(dims, level / n);
    try {
      AgentResponse resp = agent.solve(z, zero_lambda, rho);
      if (!resp.ok() || !resp.decomp) return std::nullopt;
      return resp.decomp->private_cost;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  };

  auto lo = pinned_private(low);
  auto hi = pinned_private(high);
  if (!lo || !hi) return CheckOutcome::skip(8, "pinned solve failed or infeasible");

  double marginal = (*hi - *lo) / (high - low);
  o.metrics["private_low"] = *lo;
  o.metrics["private_high"] = *hi;
  o.metrics["marginal"] = marginal;

  if (marginal < -1e-6) {
    o.fired = true;
    std::ostringstream d;
    d << "reported private cost falls by " << -marginal
      << " per extra unit of aggregate volume between levels " << low << " and "
      << high;
    o.detail = d.str();
  } else {
    o.detail = "marginal private cost is nonnegative in aggregate volume";
  }
  return o;
}

// --- check 9 -----------------------------------------------------------------------

CheckOutcome check_demand_coverage(const CoordinationTrajectory& traj,
                                   const ScenarioSpec& scenario) {
  CheckOutcome o = base_outcome(9);
  if (!scenario.expectations.total_demand || *scenario.expectations.total_demand <= 0) {
    return CheckOutcome::skip(9, "scenario declares no demand");
  }
  if (traj.records.empty()) return CheckOutcome::skip(9, "no complete iterations");

  double total_po = traj.final_record().z.sum();
  double demand = *scenario.expectations.total_demand;
  double ratio = total_po / demand;
  o.metrics["coverage_ratio"] = ratio;

  if (ratio < 0.5 || ratio > 3.0) {
    o.fired = true;
    std::ostringstream d;
    d << "final plan totals " << total_po << " units against demand " << demand
      << " (ratio " << ratio << ")";
    o.detail = d.str();
  } else {
    o.detail = "final plan volume sits within the demand band";
  }
  return o;
}

// --- check 10 ----------------------------------------------------------------------

CheckOutcome check_dual_outliers(const CoordinationTrajectory& traj) {
  CheckOutcome o = base_outcome(10);
  if (traj.records.size() < 8) return CheckOutcome::skip(10, "fewer than 8 iterations");

  const auto& final_rec = traj.final_record();
  std::vector<double> magnitudes;
  double max_abs = 0.0;
  for (const auto& lam : final_rec.lambda) {
    for (long k = 0; k < lam.size(); ++k) {
      double a = std::abs(lam[k]);
      max_abs = std::max(max_abs, a);
      if (a > 0.0) magnitudes.push_back(a);
    }
  }
  o.metrics["max_abs_dual"] = max_abs;

  bool outlier = false;
  if (!magnitudes.empty()) {
    std::sort(magnitudes.begin(), magnitudes.end());
    double median = magnitudes[magnitudes.size() / 2];
    o.metrics["median_nonzero_dual"] = median;
    outlier = max_abs > 100.0 * median;
  }

  // monotone, material growth of max |lambda| over the last quarter; a dual
  // settling toward its limit grows monotonically too, so require the tail
  // to climb by a tenth of its starting level
  size_t len = traj.records.size();
  size_t tail = std::max<size_t>(3, (len + 3) / 4);
  bool growing = tail <= len;
  double first = -1.0, prev = -1.0, last = 0.0;
  for (size_t k = len - tail; k < len && growing; ++k) {
    double m = 0.0;
    for (const auto& lam : traj.records[k].lambda) {
      for (long i = 0; i < lam.size(); ++i) m = std::max(m, std::abs(lam[i]));
    }
    if (first < 0.0) first = m;
    if (prev >= 0.0 && m <= prev + 1e-12) growing = false;
    prev = m;
    last = m;
  }
  if (growing) {
    growing = (last - first) > std::max(0.1 * first, 1e-6);
  }

  if (outlier || growing) {
    o.fired = true;
    o.detail = outlier ? "final dual prices contain a 100x-median outlier"
                       : "max dual price grows monotonically over the last quarter";
  } else {
    o.detail = "dual prices bounded and settled";
  }
  return o;
}

// --- assembly ----------------------------------------------------------------------

EvidenceReport extract_evidence(const CoordinationTrajectory& traj,
                                const FormulationIR& candidate_ir,
                                const ScenarioSpec& scenario, std::uint64_t seed,
                                EvidenceMode mode) {
  EvidenceReport rep;
  const bool want_behavioral = mode != EvidenceMode::static_only;
  const bool want_static = mode != EvidenceMode::behavioral_only;

  std::shared_ptr<IrAgent> candidate;
  std::shared_ptr<IrAgent> counterparty;
  std::string agent_error;
  if (want_behavioral) {
    try {
      candidate = std::make_shared<IrAgent>("candidate", candidate_ir);
      counterparty = make_counterparty(scenario.counterparty, scenario.dims);
    } catch (const std::exception& e) {
      agent_error = e.what();
      candidate.reset();
    }
  }

  auto behavioral = [&](int id, const std::function<CheckOutcome()>& run) {
    if (!want_behavioral) return CheckOutcome::skip(id, "behavioral evidence suppressed");
    if (!candidate) return CheckOutcome::skip(id, "candidate agent unavailable: " + agent_error);
    try {
      return run();
    } catch (const std::exception& e) {
      return CheckOutcome::skip(id, std::string("check error: ") + e.what());
    }
  };
  auto static_check = [&](int id, const std::function<CheckOutcome()>& run) {
    if (!want_static) return CheckOutcome::skip(id, "static evidence suppressed");
    try {
      return run();
    } catch (const std::exception& e) {
      return CheckOutcome::skip(id, std::string("check error: ") + e.what());
    }
  };

  std::vector<PlanTensor> probes;
  if (want_behavioral && candidate) probes = standard_probes(scenario, seed);

  rep.outcomes.push_back(behavioral(1, [&] {
    return check_utility_sign(*candidate, scenario, probes);
  }));
  rep.outcomes.push_back(behavioral(2, [&] {
    return check_price_response(*candidate, scenario, seed);
  }));
  rep.outcomes.push_back(behavioral(3, [&] { return check_convergence(traj); }));
  rep.outcomes.push_back(behavioral(4, [&] {
    return check_degenerate_plan(traj, scenario);
  }));
  rep.outcomes.push_back(behavioral(5, [&] {
    if (traj.records.empty()) return CheckOutcome::skip(5, "no consensus probe available");
    const PlanTensor& z = traj.final_record().z;
    double step = std::max(0.01 * z.max(), 1e-3);
    return check_social_gradient(*candidate, *counterparty, z, step, seed);
  }));
  rep.outcomes.push_back(static_check(6, [&] {
    CheckOutcome o = base_outcome(6);
    auto flags = find_cost_data_antipatterns(candidate_ir, scenario.field_infos());
    o.metrics["flagged_terms"] = static_cast<double>(flags.size());
    if (!flags.empty()) {
      o.fired = true;
      std::ostringstream d;
      for (size_t i = 0; i < flags.size(); ++i) {
        if (i) d << "; ";
        d << flags[i].detail;
      }
      o.detail = d.str();
    } else {
      o.detail = "no cost parameter multiplies fixed data in the objective";
    }
    return o;
  }));
  rep.outcomes.push_back(static_check(7, [&] {
    CheckOutcome o = base_outcome(7);
    auto audit =
        audit_decision_variables(candidate_ir, scenario.expectations.expected_roles);
    o.metrics["missing_roles"] = static_cast<double>(audit.missing_roles.size());
    o.metrics["unexpected_variables"] =
        static_cast<double>(audit.unexpected_variables.size());
    o.metrics["disconnected_variables"] =
        static_cast<double>(audit.disconnected_variables.size());
    if (!audit.clean()) {
      o.fired = true;
      std::ostringstream d;
      bool first = true;
      auto emit = [&](const char* label, const std::vector<std::string>& names) {
        if (names.empty()) return;
        if (!first) d << "; ";
        first = false;
        d << label << ":";
        for (const auto& n : names) d << " " << n;
      };
      emit("expected roles unmatched", audit.missing_roles);
      emit("variables outside the described decisions", audit.unexpected_variables);
      emit("decisions with no path to the public plan", audit.disconnected_variables);
      o.detail = d.str();
    } else {
      o.detail = "private decisions line up with the described decisions";
    }
    return o;
  }));
  rep.outcomes.push_back(behavioral(8, [&] {
    return check_marginal_cost(*candidate, scenario);
  }));
  rep.outcomes.push_back(behavioral(9, [&] {
    return check_demand_coverage(traj, scenario);
  }));
  rep.outcomes.push_back(behavioral(10, [&] { return check_dual_outliers(traj); }));
  rep.outcomes.push_back(static_check(11, [&] {
    CheckOutcome o = base_outcome(11);
    auto missing = find_missing_cost_parameters(candidate_ir, scenario.field_infos());
    o.metrics["missing_fields"] = static_cast<double>(missing.size());
    if (!missing.empty()) {
      o.fired = true;
      std::ostringstream d;
      d << "cost fields absent from the objective:";
      for (const auto& m : missing) d << " " << m;
      o.detail = d.str();
    } else {
      o.detail = "every cost field reaches the objective";
    }
    return o;
  }));

  std::sort(rep.outcomes.begin(), rep.outcomes.end(),
            [](const CheckOutcome& a, const CheckOutcome& b) { return a.id < b.id; });
  rep.has_fail = false;
  for (const auto& o : rep.outcomes) {
    if (o.fired && o.severity == Severity::hard) rep.has_fail = true;
  }
  return rep;
}

// --- serialization -----------------------------------------------------------------

nlohmann::json evidence_to_json(const EvidenceReport& rep) {
  nlohmann::json j;
  nlohmann::json outcomes = nlohmann::json::array();
  for (const auto& o : rep.outcomes) {
    nlohmann::json e;
    e["id"] = o.id;
    e["name"] = o.name;
    e["source"] = check_source_name(o.source);
    e["severity"] = severity_name(o.severity);
    e["fired"] = o.fired;
    e["skipped"] = o.skipped;
    e["detail"] = o.detail;
    e["metrics"] = o.metrics;
    outcomes.push_back(e);
  }
  j["outcomes"] = outcomes;
  j["has_fail"] = rep.has_fail;
  j["detected"] = rep.detected();
  return j;
}

EvidenceReport evidence_from_json(const nlohmann::json& j) {
  EvidenceReport rep;
  for (const auto& e : j.at("outcomes")) {
    CheckOutcome o;
    o.id = e.at("id").get<int>();
    o.name = e.at("name").get<std::string>();
    o.source = e.at("source").get<std::string>() == "behavioral"
                   ? CheckSource::behavioral
                   : CheckSource::static_analysis;
    std::string sev = e.at("severity").get<std::string>();
    o.severity = sev == "hard"          ? Severity::hard
                 : sev == "soft"        ? Severity::soft
                 : sev == "warning"     ? Severity::warning
                                        : Severity::informational;
    o.fired = e.at("fired").get<bool>();
    o.skipped = e.at("skipped").get<bool>();
    o.detail = e.at("detail").get<std::string>();
    o.metrics = e.value("metrics", std::map<std::string, double>{});
    rep.outcomes.push_back(std::move(o));
  }
  rep.has_fail = j.at("has_fail").get<bool>();
  return rep;
}

std::string render_evidence_table(const EvidenceReport& rep) {
  std::ostringstream out;
  out << " # | check                     | source     | severity      | status\n";
  out << "---+---------------------------+------------+---------------+--------\n";
  for (const auto& o : rep.outcomes) {
    char line[160];
    std::snprintf(line, sizeof(line), "%2d | %-25s | %-10s | %-13s | %s\n", o.id,
                  o.name.c_str(), check_source_name(o.source).c_str(),
                  severity_name(o.severity).c_str(),
                  o.skipped ? "skipped" : (o.fired ? "FIRED" : "ok"));
    out << line;
  }
  out << (rep.has_fail ? "has_fail: true\n" : "has_fail: false\n");
  return out.str();
}

}  // namespace optiloop
