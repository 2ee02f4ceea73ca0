#include "optiloop/faults.hpp"

#include "optiloop/agents.hpp"
#include "optiloop/ir_eval.hpp"
#include "optiloop/metrics.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

namespace optiloop {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, const std::string& tag) {
  std::uint64_t h = 1469598103934665603ull ^ seed;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdull;
  h ^= h >> 33;
  return h;
}

bool coef_has_cost_param(const FormulationIR& ir, const CoefExpr& coef,
                         const ScenarioSpec& scenario) {
  for (const auto& pr : coef.params) {
    const Parameter* p = ir.find_parameter(pr.name);
    if (!p) continue;
    const FieldMeta* f = scenario.find_field(p->source_field);
    if (f && f->role == FieldRoleKind::cost) return true;
  }
  return false;
}

/// Smallest private value the flipped model shows at the probe plans and at
/// its own optimum; the most negative flip is the behaviorally loudest bug.
double flipped_visibility(const FormulationIR& flipped, const ScenarioSpec& scenario,
                          const std::vector<PlanTensor>& probes) {
  double min_value = std::numeric_limits<double>::infinity();
  try {
    IrAgent agent("flipped", flipped);
    for (const auto& p : probes) {
      PrivateValue v = agent.private_value(p);
      if (v.feasible()) min_value = std::min(min_value, v.value);
    }
    double entry = 1.0;
    if (scenario.expectations.total_demand && *scenario.expectations.total_demand > 0) {
      entry = *scenario.expectations.total_demand /
              static_cast<double>(scenario.dims.size());
    }
    AgentResponse resp = agent.solve(PlanTensor::constant(scenario.dims, entry),
                                     PlanTensor::zeros(scenario.dims),
                                     PlanTensor::constant(scenario.dims, 1.0));
    if (resp.ok() && resp.decomp) {
      min_value = std::min(min_value, resp.decomp->private_cost);
    }
  } catch (const std::exception&) {
    return std::numeric_limits<double>::infinity();
  }
  return min_value;
}

template <typename T>
const T& rotate_pick(const std::vector<T>& sorted, std::uint64_t seed) {
  return sorted[static_cast<size_t>(seed % sorted.size())];
}

struct ProbeBattery {
  std::vector<PlanTensor> plans;
  PlanTensor z;
  PlanTensor lambda0;
  PlanTensor rho1;
};

ProbeBattery make_battery(const ScenarioSpec& scenario, std::uint64_t seed) {
  ProbeBattery b;
  b.plans = standard_probes(scenario, seed);
  double entry = 1.0;
  if (scenario.expectations.total_demand && *scenario.expectations.total_demand > 0) {
    entry = *scenario.expectations.total_demand /
            static_cast<double>(scenario.dims.size());
  }
  b.z = PlanTensor::constant(scenario.dims, entry);
  b.lambda0 = PlanTensor::zeros(scenario.dims);
  b.rho1 = PlanTensor::constant(scenario.dims, 1.0);
  return b;
}

bool behaviorally_distinct(const FormulationIR& source, const FormulationIR& buggy,
                           const ProbeBattery& battery) {
  for (const auto& plan : battery.plans) {
    PrivateValue a = eval_private(source, plan);
    PrivateValue c = eval_private(buggy, plan);
    if (a.feasible() != c.feasible()) return true;
    if (a.feasible() && std::abs(a.value - c.value) > 1e-7) return true;
  }
  try {
    IrAgent sa("source", source), ba("buggy", buggy);
    AgentResponse ra = sa.solve(battery.z, battery.lambda0, battery.rho1);
    AgentResponse rb = ba.solve(battery.z, battery.lambda0, battery.rho1);
    if (ra.ok() != rb.ok()) return true;
    if (ra.ok() && norm2(ra.proposal - rb.proposal) > 1e-6) return true;
  } catch (const std::exception&) {
    return true;
  }
  return false;
}

}  // namespace

std::string fault_kind_name(FaultKind k) {
  switch (k) {
    case FaultKind::interface_mismatch: return "interface_mismatch";
    case FaultKind::sign_flip: return "sign_flip";
    case FaultKind::cost_on_data: return "cost_on_data";
    case FaultKind::missing_cost: return "missing_cost";
    case FaultKind::constraint_scope: return "constraint_scope";
    case FaultKind::degenerate: return "degenerate";
  }
  return "?";
}

FaultKind fault_kind_from_name(const std::string& s) {
  for (FaultKind k : all_fault_kinds()) {
    if (fault_kind_name(k) == s) return k;
  }
  throw std::invalid_argument("unknown fault kind '" + s + "'");
}

std::vector<FaultKind> all_fault_kinds() {
  return {FaultKind::interface_mismatch, FaultKind::sign_flip, FaultKind::cost_on_data,
          FaultKind::missing_cost, FaultKind::constraint_scope, FaultKind::degenerate};
}

std::string interface_fault_name(InterfaceFaultKind k) {
  switch (k) {
    case InterfaceFaultKind::none: return "none";
    case InterfaceFaultKind::wrong_dims: return "wrong_dims";
    case InterfaceFaultKind::missing_decomp: return "missing_decomp";
  }
  return "?";
}

FaultedCandidate inject(const FormulationIR& ir, const FaultSpec& spec,
                        const ScenarioSpec& scenario) {
  FaultedCandidate out;
  out.scenario = scenario.name;
  out.kind = spec.kind;
  out.ir = ir;

  switch (spec.kind) {
    case FaultKind::interface_mismatch: {
      out.iface = (spec.seed % 2 == 0) ? InterfaceFaultKind::wrong_dims
                                       : InterfaceFaultKind::missing_decomp;
      out.target = interface_fault_name(out.iface);
      return out;  // IR untouched; the wrapper breaks the solve contract
    }

    case FaultKind::sign_flip: {
      std::vector<std::string> eligible;
      for (const auto& t : ir.objective) {
        if (t.kind != TermKind::linear_var) continue;
        if (!coef_has_cost_param(ir, t.coef, scenario)) continue;
        eligible.push_back(t.name);
      }
      if (eligible.empty())
        throw IncompatibleTarget("sign_flip: no linear cost term to corrupt");
      std::sort(eligible.begin(), eligible.end());

      std::string target = spec.target;
      if (target.empty()) {
        auto probes = standard_probes(scenario, spec.seed);
        double best = std::numeric_limits<double>::infinity();
        for (const auto& name : eligible) {
          FormulationIR flipped = ir;
          for (auto& t : flipped.objective) {
            if (t.name == name) t.weight = -t.weight;
          }
          if (!validate(flipped).ok()) continue;
          double vis = flipped_visibility(flipped, scenario, probes);
          if (vis < best) {
            best = vis;
            target = name;
          }
        }
        if (target.empty()) target = rotate_pick(eligible, spec.seed);
      }

      ObjectiveTerm original;
      bool found = false;
      for (auto& t : out.ir.objective) {
        if (t.name == target) {
          original = t;
          t.weight = -t.weight;
          found = true;
        }
      }
      if (!found) throw IncompatibleTarget("sign_flip: unknown target '" + target + "'");
      out.target = target;
      PatchEdit fix;
      fix.op = PatchEdit::Op::replace_objective_term;
      fix.target = target;
      fix.term = original;
      out.ground_truth_repair.edits.push_back(fix);
      out.designated_checks = {1, 2};
      break;
    }

    case FaultKind::cost_on_data: {
      std::vector<std::string> eligible;
      for (const auto& t : ir.objective) {
        if (t.kind == TermKind::linear_var && coef_has_cost_param(ir, t.coef, scenario))
          eligible.push_back(t.name);
      }
      if (eligible.empty())
        throw IncompatibleTarget("cost_on_data: no linear cost term to corrupt");
      std::sort(eligible.begin(), eligible.end());
      std::string target =
          spec.target.empty() ? rotate_pick(eligible, spec.seed) : spec.target;

      // replacement data: prefer fixed flows, then stock, capacity, demand
      auto role_rank = [](FieldRoleKind r) {
        switch (r) {
          case FieldRoleKind::inflow: return 0;
          case FieldRoleKind::inventory: return 1;
          case FieldRoleKind::capacity: return 2;
          case FieldRoleKind::demand: return 3;
          case FieldRoleKind::other: return 4;
          case FieldRoleKind::cost: return 5;
        }
        return 6;
      };
      const Parameter* replacement = nullptr;
      int best_rank = 5;
      for (const auto& p : ir.parameters) {
        const FieldMeta* f = scenario.find_field(p.source_field);
        if (!f || f->role == FieldRoleKind::cost) continue;
        int rank = role_rank(f->role);
        if (rank < best_rank ||
            (rank == best_rank && replacement && p.name < replacement->name)) {
          best_rank = rank;
          replacement = &p;
        }
      }
      if (!replacement)
        throw IncompatibleTarget("cost_on_data: no fixed-data parameter available");

      ObjectiveTerm original;
      bool found = false;
      for (auto& t : out.ir.objective) {
        if (t.name != target) continue;
        original = t;
        ObjectiveTerm corrupted = t;
        corrupted.kind = TermKind::const_data;
        corrupted.var_a.reset();
        corrupted.var_b.reset();
        ParamRef pr;
        pr.name = replacement->name;
        for (size_t k = 0; k < replacement->shape.size(); ++k) {
          pr.indices.push_back(IndexRef::sym("f" + std::to_string(k)));
        }
        corrupted.coef.params.push_back(pr);
        t = corrupted;
        found = true;
      }
      if (!found)
        throw IncompatibleTarget("cost_on_data: unknown target '" + target + "'");
      out.target = target + "*" + replacement->name;
      PatchEdit fix;
      fix.op = PatchEdit::Op::replace_objective_term;
      fix.target = target;
      fix.term = original;
      out.ground_truth_repair.edits.push_back(fix);
      out.designated_checks = {6};
      break;
    }

    case FaultKind::missing_cost: {
      std::vector<std::string> eligible;
      for (const auto& f : scenario.fields) {
        if (f.role != FieldRoleKind::cost) continue;
        for (const auto& t : ir.objective) {
          for (const auto& pr : t.coef.params) {
            const Parameter* p = ir.find_parameter(pr.name);
            if (p && p->source_field == f.name) {
              eligible.push_back(f.name);
              goto next_field;
            }
          }
        }
      next_field:;
      }
      if (eligible.empty())
        throw IncompatibleTarget("missing_cost: no cost field reaches the objective");
      std::sort(eligible.begin(), eligible.end());
      eligible.erase(std::unique(eligible.begin(), eligible.end()), eligible.end());
      std::string field =
          spec.target.empty() ? rotate_pick(eligible, spec.seed) : spec.target;

      std::vector<ObjectiveTerm> removed;
      auto uses_field = [&](const ObjectiveTerm& t) {
        for (const auto& pr : t.coef.params) {
          const Parameter* p = ir.find_parameter(pr.name);
          if (p && p->source_field == field) return true;
        }
        return false;
      };
      for (const auto& t : out.ir.objective) {
        if (uses_field(t)) removed.push_back(t);
      }
      if (removed.empty())
        throw IncompatibleTarget("missing_cost: field '" + field + "' unused");
      if (removed.size() > 2)
        throw IncompatibleTarget("missing_cost: field feeds more than two terms");
      out.ir.objective.erase(
          std::remove_if(out.ir.objective.begin(), out.ir.objective.end(), uses_field),
          out.ir.objective.end());
      out.target = field;
      for (const auto& t : removed) {
        PatchEdit fix;
        fix.op = PatchEdit::Op::add_objective_term;
        fix.target = t.name;
        fix.term = t;
        out.ground_truth_repair.edits.push_back(fix);
      }
      out.designated_checks = {11};
      break;
    }

    case FaultKind::constraint_scope: {
      const Variable* pub = ir.public_variable();
      std::vector<std::string> eligible;
      for (const auto& c : ir.constraints) {
        for (const auto& t : c.lhs) {
          if (pub && t.var.name == pub->name) {
            eligible.push_back(c.name);
            break;
          }
        }
      }
      if (eligible.empty())
        throw IncompatibleTarget("constraint_scope: no public-coupling constraint");
      std::sort(eligible.begin(), eligible.end());
      std::string target =
          spec.target.empty() ? rotate_pick(eligible, spec.seed) : spec.target;

      LinearConstraint original;
      bool found = false;
      for (const auto& c : ir.constraints) {
        if (c.name == target) {
          original = c;
          found = true;
        }
      }
      if (!found)
        throw IncompatibleTarget("constraint_scope: unknown target '" + target + "'");
      out.ir.constraints.erase(
          std::remove_if(out.ir.constraints.begin(), out.ir.constraints.end(),
                         [&](const LinearConstraint& c) { return c.name == target; }),
          out.ir.constraints.end());
      out.target = target;
      PatchEdit fix;
      fix.op = PatchEdit::Op::add_constraint;
      fix.target = target;
      fix.constraint = original;
      out.ground_truth_repair.edits.push_back(fix);
      out.designated_checks = {3, 7};
      break;
    }

    case FaultKind::degenerate: {
      if (!scenario.expectations.nontrivial_plan) {
        throw IncompatibleTarget(
            "degenerate: scenario expects a trivial plan, the expectation gate "
            "would suppress the signal");
      }
      const Variable* pub = ir.public_variable();
      if (!pub) throw IncompatibleTarget("degenerate: no public variable");
      double orig_lower = pub->lower, orig_upper = pub->upper;
      for (auto& v : out.ir.variables) {
        if (v.name == pub->name) v.upper = 0.0;
      }
      out.target = pub->name;
      PatchEdit fix;
      fix.op = PatchEdit::Op::set_variable_bounds;
      fix.target = pub->name;
      fix.lower = orig_lower;
      fix.upper = orig_upper;
      out.ground_truth_repair.edits.push_back(fix);
      out.designated_checks = {4};
      break;
    }
  }

  // semantic bugs must stay invisible to local validation
  ValidationReport vr = validate(out.ir);
  if (!vr.ok()) {
    throw IncompatibleTarget("injection broke local validation: " + vr.errors.front());
  }
  ProbeBattery battery = make_battery(scenario, spec.seed);
  if (!behaviorally_distinct(ir, out.ir, battery)) {
    throw IncompatibleTarget("injection is a behavioral no-op at all probes");
  }
  return out;
}

std::vector<FaultedCandidate> fault_matrix(const std::vector<ScenarioSpec>& scenarios,
                                           const std::vector<FaultKind>& kinds,
                                           std::uint64_t seed,
                                           std::vector<MatrixSkip>* skips) {
  std::vector<FaultedCandidate> out;
  for (const auto& scenario : scenarios) {
    for (FaultKind kind : kinds) {
      FaultSpec spec;
      spec.kind = kind;
      spec.seed = mix_seed(seed, scenario.name + "/" + fault_kind_name(kind));
      try {
        out.push_back(inject(scenario.reference, spec, scenario));
      } catch (const IncompatibleTarget& e) {
        if (skips) skips->push_back(MatrixSkip{scenario.name, kind, e.what()});
      }
    }
  }
  return out;
}

nlohmann::json fault_metadata_to_json(const FaultedCandidate& c) {
  nlohmann::json j;
  j["scenario"] = c.scenario;
  j["kind"] = fault_kind_name(c.kind);
  j["target"] = c.target;
  j["interface_fault"] = interface_fault_name(c.iface);
  j["designated_checks"] = c.designated_checks;
  j["ground_truth_repair"] = patch_to_json(c.ground_truth_repair);
  return j;
}

FaultedCandidate fault_metadata_from_json(const nlohmann::json& j, FormulationIR ir) {
  FaultedCandidate c;
  c.scenario = j.value("scenario", "");
  c.kind = fault_kind_from_name(j.at("kind").get<std::string>());
  c.target = j.value("target", "");
  std::string iface = j.value("interface_fault", "none");
  c.iface = iface == "wrong_dims"      ? InterfaceFaultKind::wrong_dims
            : iface == "missing_decomp" ? InterfaceFaultKind::missing_decomp
                                        : InterfaceFaultKind::none;
  c.designated_checks = j.value("designated_checks", std::vector<int>{});
  if (j.contains("ground_truth_repair")) {
    c.ground_truth_repair = patch_from_json(j.at("ground_truth_repair"));
  }
  c.ir = std::move(ir);
  return c;
}

}  // namespace optiloop
