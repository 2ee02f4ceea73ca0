#include "optiloop/patch.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>

namespace optiloop {

FormulationIR apply_patch(const FormulationIR& ir, const IrPatch& patch) {
  FormulationIR out = ir;
  for (const auto& e : patch.edits) {
    switch (e.op) {
      case PatchEdit::Op::replace_objective_term: {
        if (!e.term) throw PatchRejected("replace_objective_term without a term");
        bool done = false;
        for (auto& t : out.objective) {
          if (t.name == e.target) {
            t = *e.term;
            done = true;
          }
        }
        if (!done) throw PatchRejected("no objective term named '" + e.target + "'");
        break;
      }
      case PatchEdit::Op::add_objective_term: {
        if (!e.term) throw PatchRejected("add_objective_term without a term");
        for (const auto& t : out.objective) {
          if (t.name == e.term->name)
            throw PatchRejected("objective term '" + t.name + "' already exists");
        }
        out.objective.push_back(*e.term);
        break;
      }
      case PatchEdit::Op::remove_objective_term: {
        auto before = out.objective.size();
        out.objective.erase(
            std::remove_if(out.objective.begin(), out.objective.end(),
                           [&](const ObjectiveTerm& t) { return t.name == e.target; }),
            out.objective.end());
        if (out.objective.size() == before)
          throw PatchRejected("no objective term named '" + e.target + "'");
        break;
      }
      case PatchEdit::Op::replace_constraint: {
        if (!e.constraint) throw PatchRejected("replace_constraint without a constraint");
        bool done = false;
        for (auto& c : out.constraints) {
          if (c.name == e.target) {
            c = *e.constraint;
            done = true;
          }
        }
        if (!done) throw PatchRejected("no constraint named '" + e.target + "'");
        break;
      }
      case PatchEdit::Op::add_constraint: {
        if (!e.constraint) throw PatchRejected("add_constraint without a constraint");
        for (const auto& c : out.constraints) {
          if (c.name == e.constraint->name)
            throw PatchRejected("constraint '" + c.name + "' already exists");
        }
        out.constraints.push_back(*e.constraint);
        break;
      }
      case PatchEdit::Op::remove_constraint: {
        auto before = out.constraints.size();
        out.constraints.erase(
            std::remove_if(out.constraints.begin(), out.constraints.end(),
                           [&](const LinearConstraint& c) { return c.name == e.target; }),
            out.constraints.end());
        if (out.constraints.size() == before)
          throw PatchRejected("no constraint named '" + e.target + "'");
        break;
      }
      case PatchEdit::Op::set_variable_bounds: {
        bool done = false;
        for (auto& v : out.variables) {
          if (v.name == e.target) {
            v.lower = e.lower;
            v.upper = e.upper;
            done = true;
          }
        }
        if (!done) throw PatchRejected("no variable named '" + e.target + "'");
        break;
      }
    }
  }
  return out;
}

std::string patch_op_name(PatchEdit::Op op) {
  switch (op) {
    case PatchEdit::Op::replace_objective_term: return "replace_objective_term";
    case PatchEdit::Op::add_objective_term: return "add_objective_term";
    case PatchEdit::Op::remove_objective_term: return "remove_objective_term";
    case PatchEdit::Op::replace_constraint: return "replace_constraint";
    case PatchEdit::Op::add_constraint: return "add_constraint";
    case PatchEdit::Op::remove_constraint: return "remove_constraint";
    case PatchEdit::Op::set_variable_bounds: return "set_variable_bounds";
  }
  return "?";
}

PatchEdit::Op patch_op_from_name(const std::string& s) {
  if (s == "replace_objective_term") return PatchEdit::Op::replace_objective_term;
  if (s == "add_objective_term") return PatchEdit::Op::add_objective_term;
  if (s == "remove_objective_term") return PatchEdit::Op::remove_objective_term;
  if (s == "replace_constraint") return PatchEdit::Op::replace_constraint;
  if (s == "add_constraint") return PatchEdit::Op::add_constraint;
  if (s == "remove_constraint") return PatchEdit::Op::remove_constraint;
  if (s == "set_variable_bounds") return PatchEdit::Op::set_variable_bounds;
  throw std::invalid_argument("unknown patch op '" + s + "'");
}

namespace {

nlohmann::json objective_term_to_json(const ObjectiveTerm& t) {
  FormulationIR tmp;
  tmp.objective.push_back(t);
  return ir_to_json(tmp).at("objective").at(0);
}

ObjectiveTerm objective_term_from_json(const nlohmann::json& j) {
  nlohmann::json tmp;
  tmp["name"] = "patch_carrier";
  tmp["objective"] = nlohmann::json::array({j});
  return ir_from_json(tmp).objective.at(0);
}

nlohmann::json constraint_to_json(const LinearConstraint& c) {
  FormulationIR tmp;
  tmp.constraints.push_back(c);
  return ir_to_json(tmp).at("constraints").at(0);
}

LinearConstraint constraint_from_json(const nlohmann::json& j) {
  nlohmann::json tmp;
  tmp["name"] = "patch_carrier";
  tmp["constraints"] = nlohmann::json::array({j});
  return ir_from_json(tmp).constraints.at(0);
}

}  // namespace

nlohmann::json patch_to_json(const IrPatch& patch) {
  nlohmann::json edits = nlohmann::json::array();
  for (const auto& e : patch.edits) {
    nlohmann::json o;
    o["op"] = patch_op_name(e.op);
    o["target"] = e.target;
    if (e.term) o["term"] = objective_term_to_json(*e.term);
    if (e.constraint) o["constraint"] = constraint_to_json(*e.constraint);
    if (e.op == PatchEdit::Op::set_variable_bounds) {
      o["lower"] = e.lower;
      o["upper"] = std::isinf(e.upper) ? nlohmann::json() : nlohmann::json(e.upper);
    }
    edits.push_back(o);
  }
  return nlohmann::json{{"edits", edits}};
}

IrPatch patch_from_json(const nlohmann::json& j) {
  IrPatch patch;
  for (const auto& o : j.value("edits", nlohmann::json::array())) {
    PatchEdit e;
    e.op = patch_op_from_name(o.at("op").get<std::string>());
    e.target = o.value("target", "");
    if (o.contains("term")) e.term = objective_term_from_json(o.at("term"));
    if (o.contains("constraint")) e.constraint = constraint_from_json(o.at("constraint"));
    if (o.contains("lower")) e.lower = o.at("lower").get<double>();
    if (o.contains("upper")) {
      e.upper = o.at("upper").is_null() ? std::numeric_limits<double>::infinity()
                                        : o.at("upper").get<double>();
    }
    patch.edits.push_back(std::move(e));
  }
  return patch;
}

}  // namespace optiloop
