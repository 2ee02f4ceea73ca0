#include "optiloop/diagnosis.hpp"

#include "optiloop/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace optiloop {

namespace {

/// Applies an interface fault on top of a working IR agent: the formulation
/// is fine, the emitted response violates the solve contract.
class WrappedAgent : public Agent {
 public:
  WrappedAgent(std::shared_ptr<IrAgent> inner, InterfaceFaultKind fault)
      : inner_(std::move(inner)), fault_(fault) {}

  const std::string& name() const override { return inner_->name(); }

  AgentResponse solve(const PlanTensor& z, const PlanTensor& lambda,
                      const PlanTensor& rho) const override {
    AgentResponse resp = inner_->solve(z, lambda, rho);
    if (!resp.ok()) return resp;
    switch (fault_) {
      case InterfaceFaultKind::none:
        break;
      case InterfaceFaultKind::wrong_dims: {
        Dims d = z.dims();
        resp.proposal = PlanTensor::zeros(Dims(d.items, d.nodes, d.periods + 1));
        break;
      }
      case InterfaceFaultKind::missing_decomp:
        resp.decomp.reset();
        break;
    }
    return resp;
  }

  PrivateValue private_value(const PlanTensor& plan) const override {
    return inner_->private_value(plan);
  }

 private:
  std::shared_ptr<IrAgent> inner_;
  InterfaceFaultKind fault_;
};

struct Verification {
  bool local_ok = false;
  std::string local_error;
  bool has_episode = false;
  CoordinationTrajectory traj;
  EvidenceReport evidence;
};

std::shared_ptr<Agent> build_agent(const Candidate& cand) {
  auto inner = std::make_shared<IrAgent>("candidate", cand.ir);
  if (cand.iface == InterfaceFaultKind::none) return inner;
  return std::make_shared<WrappedAgent>(inner, cand.iface);
}

/// Local validation: IR-level checks plus a smoke solve against the solve
/// contract (shape and decomposition present). Interface faults die here.
std::string local_validate(const ScenarioSpec& scenario, const Candidate& cand,
                           std::shared_ptr<Agent>* agent_out) {
  ValidationReport vr = validate(cand.ir);
  if (!vr.ok()) return "validation: " + vr.errors.front();

  std::shared_ptr<Agent> agent;
  try {
    agent = build_agent(cand);
  } catch (const std::exception& e) {
    return std::string("agent construction: ") + e.what();
  }

  try {
    AgentResponse smoke =
        agent->solve(PlanTensor::zeros(scenario.dims), PlanTensor::zeros(scenario.dims),
                     PlanTensor::constant(scenario.dims, 1.0));
    if (!smoke.ok()) return "smoke solve status " + qp_status_name(smoke.status);
    if (!(smoke.proposal.dims() == scenario.dims)) return "smoke solve returned wrong dims";
    if (!smoke.decomp) return "smoke solve returned no objective decomposition";
  } catch (const std::exception& e) {
    return std::string("smoke solve: ") + e.what();
  }
  *agent_out = agent;
  return "";
}

Verification run_verification(const ScenarioSpec& scenario, const Candidate& cand,
                              const PipelineOptions& opt) {
  Verification v;
  std::shared_ptr<Agent> agent;
  v.local_error = local_validate(scenario, cand, &agent);
  v.local_ok = v.local_error.empty();
  if (!v.local_ok) return v;

  auto counterparty = make_counterparty(scenario.counterparty, scenario.dims);
  CoordinationConfig config =
      CoordinationConfig::defaults(scenario.dims, CoordinationMode::verification);
  config.max_iter = opt.verification_cap;
  v.traj = coord_run({agent.get(), counterparty.get()}, config);
  v.has_episode = true;
  v.evidence = extract_evidence(v.traj, cand.ir, scenario, opt.seed, opt.evidence_mode);
  return v;
}

}  // namespace

CodefixOutcome apply_codefix(const FormulationIR& ir, const IrPatch& patch,
                             const ScenarioSpec& scenario, const PipelineOptions& opt) {
  if (patch.edits.size() > 2) {
    throw PatchRejected("codefix patches are bounded to two edits");
  }
  CodefixOutcome out;
  out.ir = apply_patch(ir, patch);

  ValidationReport vr = validate(out.ir);
  if (!vr.ok()) throw PatchRejected("patched formulation invalid: " + vr.errors.front());

  // does the patch change objective behavior at the probe plans?
  out.behaviorally_identical = true;
  for (const auto& probe : standard_probes(scenario, opt.seed)) {
    PrivateValue before = eval_private(ir, probe);
    PrivateValue after = eval_private(out.ir, probe);
    if (before.feasible() != after.feasible() ||
        (before.feasible() && std::abs(before.value - after.value) > 1e-9)) {
      out.behaviorally_identical = false;
      break;
    }
  }

  Candidate patched{out.ir, InterfaceFaultKind::none};
  Verification v = run_verification(scenario, patched, opt);
  if (!v.local_ok) throw PatchRejected("patched agent failed local validation");
  out.reverify = v.evidence;
  out.trajectory = v.traj;
  out.accepted_via_escape = out.behaviorally_identical && !v.evidence.has_fail;
  return out;
}

PipelineResult run_pipeline(const ScenarioSpec& scenario, const Candidate& candidate,
                            RepairOracle& oracle, const PipelineOptions& opt) {
  if (opt.repair_budget < 1) throw std::invalid_argument("repair budget must be >= 1");

  PipelineResult res;
  Candidate cand = candidate;
  int repairs = 0;
  int attempt = 0;

  struct Scored {
    FormulationIR ir;
    bool has_fail = true;
    int hard = 0;
    double gap = 100.0;
  };
  std::vector<Scored> pool;
  auto remember = [&](const FormulationIR& ir, const EvidenceReport& ev) {
    Scored s;
    s.ir = ir;
    s.has_fail = ev.has_fail;
    s.hard = ev.hard_fired_count();
    auto [match, gap] =
        objective_metrics(ir, scenario.reference, standard_probes(scenario, opt.seed));
    (void)match;
    s.gap = gap;
    pool.push_back(std::move(s));
  };

  auto accept_with = [&](const FormulationIR& ir, AttemptRecord rec) {
    res.attempts.push_back(std::move(rec));
    res.action_history.push_back(res.attempts.back().action);
    res.final_ir = ir;
    res.accepted = true;
  };

  Verification v = run_verification(scenario, cand, opt);
  if (v.has_episode) ++res.verification_episodes;
  bool fresh_identity_codefix = false;

  while (true) {
    AttemptRecord rec;
    rec.attempt = attempt;
    rec.local_ok = v.local_ok;
    rec.local_error = v.local_error;

    if (!v.local_ok) {
      rec.action = "PatchOrRegenerate";
      res.attempts.push_back(rec);
      res.action_history.push_back(rec.action);
      if (repairs >= opt.repair_budget) break;

      RepairRequest req;
      req.kind = RepairRequestKind::regenerate;
      req.scenario = &scenario;
      req.current = cand.ir;
      req.attempt = attempt;
      RepairResponse resp = oracle.repair(req);
      ++repairs;
      ++attempt;
      if (resp.ok && resp.ir && !resp.echo_input) {
        cand = Candidate{*resp.ir, InterfaceFaultKind::none};
      } else if (resp.ok && resp.patch && !resp.echo_input) {
        try {
          cand = Candidate{apply_patch(cand.ir, *resp.patch), InterfaceFaultKind::none};
        } catch (const PatchRejected&) {
          // failed repair; candidate unchanged
        }
      }
      v = run_verification(scenario, cand, opt);
      if (v.has_episode) ++res.verification_episodes;
      continue;
    }

    rec.evidence = v.evidence;
    DiagnosisAction action = diagnose(v.evidence);
    rec.action = action_name(action.kind);
    rec.note = action.rationale;
    remember(cand.ir, v.evidence);

    if (fresh_identity_codefix && !v.evidence.has_fail) {
      rec.action = "Accept";
      rec.note = "behavior-preserving patch with clean re-verification; escape hatch";
      accept_with(cand.ir, std::move(rec));
      break;
    }
    fresh_identity_codefix = false;

    if (action.kind == ActionKind::accept) {
      accept_with(cand.ir, std::move(rec));
      break;
    }

    res.attempts.push_back(rec);
    res.action_history.push_back(rec.action);
    if (repairs >= opt.repair_budget) break;

    RepairRequest req;
    req.kind = action.kind == ActionKind::codefix ? RepairRequestKind::codefix
                                                  : RepairRequestKind::reformulate;
    req.scenario = &scenario;
    req.current = cand.ir;
    req.evidence = v.evidence;
    req.attempt = attempt;
    RepairResponse resp = oracle.repair(req);
    ++repairs;
    ++attempt;

    if (resp.ok && resp.patch && action.kind == ActionKind::codefix) {
      try {
        CodefixOutcome co = apply_codefix(cand.ir, *resp.patch, scenario, opt);
        ++res.verification_episodes;
        cand = Candidate{co.ir, InterfaceFaultKind::none};
        if (co.accepted_via_escape) {
          AttemptRecord esc;
          esc.attempt = attempt;
          esc.local_ok = true;
          esc.evidence = co.reverify;
          esc.action = "Accept";
          esc.note = "behavior-preserving patch with clean re-verification; escape hatch";
          remember(cand.ir, co.reverify);
          res.last_trajectory = co.trajectory;
          accept_with(cand.ir, std::move(esc));
          break;
        }
        fresh_identity_codefix = co.behaviorally_identical;
        v.local_ok = true;
        v.local_error.clear();
        v.traj = co.trajectory;
        v.evidence = co.reverify;
        v.has_episode = true;
        res.last_trajectory = co.trajectory;
        continue;
      } catch (const PatchRejected& e) {
        res.action_history.back() += " (patch rejected: " + std::string(e.what()) + ")";
        continue;  // evidence unchanged; attempt consumed
      }
    }

    if (resp.ok && resp.patch && action.kind == ActionKind::reformulate) {
      // a patch-shaped answer to a reformulation request is applied as a
      // replacement construction (no edit bound)
      try {
        FormulationIR next = apply_patch(cand.ir, *resp.patch);
        if (validate(next).ok()) cand = Candidate{next, InterfaceFaultKind::none};
      } catch (const PatchRejected&) {
        // failed repair; candidate unchanged
      }
      v = run_verification(scenario, cand, opt);
      if (v.has_episode) ++res.verification_episodes;
      continue;
    }

    if (resp.ok && resp.ir) {
      if (!resp.echo_input) {
        cand = Candidate{*resp.ir, InterfaceFaultKind::none};
      }
      v = run_verification(scenario, cand, opt);
      if (v.has_episode) ++res.verification_episodes;
      continue;
    }

    // oracle failed or returned nothing usable; attempt consumed
    res.action_history.back() += " (oracle failed: " + resp.note + ")";
  }

  if (v.has_episode) res.last_trajectory = v.traj;
  res.repair_count = repairs;

  if (!res.accepted) {
    if (!pool.empty()) {
      auto best = std::min_element(
          pool.begin(), pool.end(), [](const Scored& a, const Scored& b) {
            return std::tie(a.has_fail, a.hard, a.gap) < std::tie(b.has_fail, b.hard, b.gap);
          });
      res.final_ir = best->ir;
    } else {
      res.final_ir = cand.ir;
    }
  }
  return res;
}

}  // namespace optiloop
