#pragma once

#include "optiloop/formulation.hpp"
#include "optiloop/patch.hpp"
#include "optiloop/scenarios.hpp"

#include <nlohmann/json_fwd.hpp>

#include <string>
#include <vector>

namespace optiloop {

struct IncompatibleTarget : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class FaultKind {
  interface_mismatch,
  sign_flip,
  cost_on_data,
  missing_cost,
  constraint_scope,
  degenerate,
};

std::string fault_kind_name(FaultKind k);
FaultKind fault_kind_from_name(const std::string& s);
std::vector<FaultKind> all_fault_kinds();

enum class InterfaceFaultKind { none, wrong_dims, missing_decomp };

std::string interface_fault_name(InterfaceFaultKind k);

struct FaultSpec {
  FaultKind kind = FaultKind::sign_flip;
  std::string target;  // empty = seeded-deterministic selection
  std::uint64_t seed = 0;
};

/// A labeled buggy candidate: the corrupted IR (or an interface wrapper
/// directive), the inverse edit that restores the source, and which checks
/// Table-style grading treats as its designated signal.
struct FaultedCandidate {
  std::string scenario;
  FaultKind kind = FaultKind::sign_flip;
  std::string target;
  FormulationIR ir;                    // equals the source for interface faults
  InterfaceFaultKind iface = InterfaceFaultKind::none;
  IrPatch ground_truth_repair;         // empty when repair = drop the wrapper
  std::vector<int> designated_checks;  // empty = caught by local validation
};

/// Applies one Table-style failure transform. Non-interface candidates must
/// still pass local validation and must differ behaviorally from the source
/// at a probe; otherwise the injection is rejected.
FaultedCandidate inject(const FormulationIR& ir, const FaultSpec& spec,
                        const ScenarioSpec& scenario);

struct MatrixSkip {
  std::string scenario;
  FaultKind kind = FaultKind::sign_flip;
  std::string reason;
};

std::vector<FaultedCandidate> fault_matrix(const std::vector<ScenarioSpec>& scenarios,
                                           const std::vector<FaultKind>& kinds,
                                           std::uint64_t seed,
                                           std::vector<MatrixSkip>* skips = nullptr);

nlohmann::json fault_metadata_to_json(const FaultedCandidate& c);
FaultedCandidate fault_metadata_from_json(const nlohmann::json& j,
                                          FormulationIR ir);

}  // namespace optiloop
