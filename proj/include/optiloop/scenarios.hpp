#pragma once

#include "optiloop/agents.hpp"
#include "optiloop/core.hpp"
#include "optiloop/formulation.hpp"
#include "optiloop/qpsolver.hpp"

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <string>
#include <vector>

namespace optiloop {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Typed data field of a scenario. Shapes are written with the dimension
/// symbols A (items), J (nodes), T (periods), W (warehouses).
struct FieldMeta {
  std::string name;
  std::vector<std::string> shape;
  FieldRoleKind role = FieldRoleKind::other;
  std::vector<double> data;
};

struct Expectations {
  bool nontrivial_plan = true;
  std::optional<double> total_demand;
  std::vector<std::string> expected_roles;
  bool pure_variable_cost = false;  // private(0) == 0, costs scale with work
  std::string sense = "cost_min";
};

struct ScenarioSpec {
  std::string name;
  std::vector<std::string> tags;
  Dims dims;
  int warehouses = 1;
  std::string nl_text;
  std::vector<FieldMeta> fields;
  FormulationIR reference;
  CounterpartyParams counterparty;
  Expectations expectations;

  const FieldMeta* find_field(const std::string& n) const;
  std::vector<FieldInfo> field_infos() const;
  long dim_size(const std::string& symbol) const;
};

// --- files ---------------------------------------------------------------------

ScenarioSpec scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const ScenarioSpec& s);

/// Canonical file bytes for a scenario (reference IR in canonical form,
/// two-space indentation, trailing newline).
std::string emit_scenario(const ScenarioSpec& s);

ScenarioSpec load_scenario(const std::string& path);

// --- shipped scenarios -----------------------------------------------------------

ScenarioSpec example1();
ScenarioSpec example2();
ScenarioSpec example3();
std::vector<ScenarioSpec> shipped_scenarios();

/// The App-style miscompiled variant of example 2: a spurious controllable
/// production variable feeds the inventory balance next to the fixed
/// procurement inflow, so fulfilled units dodge the production cost.
FormulationIR example2_buggy_production_ir();

// --- generator -------------------------------------------------------------------

enum class GeneratorTemplate { transport, inventory, shared_capacity, congestion };

std::string generator_template_name(GeneratorTemplate t);
GeneratorTemplate generator_template_from_name(const std::string& s);

ScenarioSpec generate_scenario(GeneratorTemplate tmpl, const Dims& dims,
                               int warehouses, std::uint64_t seed);

// --- centralized joint problem -----------------------------------------------------

/// One QP over a single shared plan plus both parties' private variables;
/// objective is the sum of the two private objectives, constraints the union.
CompiledQP build_centralized(const FormulationIR& vendor_ir,
                             const CounterpartyParams& cp, const Dims& dims);

struct CentralizedSolution {
  QPStatus status = QPStatus::iteration_limit;
  double objective = 0.0;
  PlanTensor plan;
};

CentralizedSolution solve_centralized(const FormulationIR& vendor_ir,
                                      const CounterpartyParams& cp, const Dims& dims,
                                      double tol = 1e-9);

}  // namespace optiloop
