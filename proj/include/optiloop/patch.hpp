#pragma once

#include "optiloop/formulation.hpp"

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <string>
#include <vector>

namespace optiloop {

struct PatchRejected : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One bounded IR edit. CodeFix patches carry at most two of these.
struct PatchEdit {
  enum class Op {
    replace_objective_term,
    add_objective_term,
    remove_objective_term,
    replace_constraint,
    add_constraint,
    remove_constraint,
    set_variable_bounds,
  };

  Op op = Op::replace_objective_term;
  std::string target;  // term / constraint / variable name
  std::optional<ObjectiveTerm> term;
  std::optional<LinearConstraint> constraint;
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
};

struct IrPatch {
  std::vector<PatchEdit> edits;
  bool empty() const { return edits.empty(); }
};

/// Applies the edits; throws PatchRejected on unknown targets or duplicate
/// additions. Validation of the result is the caller's job.
FormulationIR apply_patch(const FormulationIR& ir, const IrPatch& patch);

std::string patch_op_name(PatchEdit::Op op);
PatchEdit::Op patch_op_from_name(const std::string& s);

nlohmann::json patch_to_json(const IrPatch& patch);
IrPatch patch_from_json(const nlohmann::json& j);

}  // namespace optiloop
