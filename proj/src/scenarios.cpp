#include "optiloop/scenarios.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace optiloop {

using json = nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> fill(size_t n, double v) { return std::vector<double>(n, v); }

IndexRef S(const char* s) { return IndexRef::sym(s); }

std::vector<IndexRef> idx(std::initializer_list<IndexRef> l) { return {l}; }

double round2(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace

const FieldMeta* ScenarioSpec::find_field(const std::string& n) const {
  for (const auto& f : fields)
    if (f.name == n) return &f;
  return nullptr;
}

std::vector<FieldInfo> ScenarioSpec::field_infos() const {
  std::vector<FieldInfo> out;
  for (const auto& f : fields) out.push_back(FieldInfo{f.name, f.role});
  return out;
}

long ScenarioSpec::dim_size(const std::string& symbol) const {
  if (symbol == "A") return dims.items;
  if (symbol == "J") return dims.nodes;
  if (symbol == "T") return dims.periods;
  if (symbol == "W") return warehouses;
  throw SchemaError("unknown dimension symbol '" + symbol + "'");
}

// --- JSON ------------------------------------------------------------------------

ScenarioSpec scenario_from_json(const nlohmann::json& j) {
  ScenarioSpec s;
  try {
    s.name = j.at("name").get<std::string>();
    s.tags = j.value("tags", std::vector<std::string>{});
    const auto& d = j.at("dims");
    s.dims = Dims(d.at("items").get<int>(), d.at("nodes").get<int>(),
                  d.at("periods").get<int>());
    s.warehouses = d.value("warehouses", 1);
    s.nl_text = j.value("nl_text", "");

    for (const auto& f : j.value("fields", json::array())) {
      FieldMeta fm;
      fm.name = f.at("name").get<std::string>();
      fm.shape = f.value("shape", std::vector<std::string>{});
      fm.role = field_role_from_name(f.value("role", "other"));
      fm.data = f.at("data").get<std::vector<double>>();
      s.fields.push_back(std::move(fm));
    }

    s.reference = ir_from_json(j.at("reference_formulation"));

    const auto& c = j.at("counterparty");
    s.counterparty.holding_cost = c.value("holding_cost", 0.4);
    s.counterparty.backlog_penalty = c.value("backlog_penalty", 2.0);
    s.counterparty.terminal_weight = c.value("terminal_weight", 1.0);
    s.counterparty.safety_stock = c.value("safety_stock", std::vector<double>{10.0});
    s.counterparty.demand = c.value("demand", std::vector<double>{});
    s.counterparty.initial_inventory =
        c.value("initial_inventory", std::vector<double>{});

    const auto& e = j.at("expectations");
    s.expectations.nontrivial_plan = e.value("nontrivial_plan", true);
    if (e.contains("total_demand") && !e.at("total_demand").is_null()) {
      s.expectations.total_demand = e.at("total_demand").get<double>();
    }
    s.expectations.expected_roles =
        e.value("expected_roles", std::vector<std::string>{});
    s.expectations.pure_variable_cost = e.value("pure_variable_cost", false);
    s.expectations.sense = e.value("sense", "cost_min");
  } catch (const json::exception& ex) {
    throw SchemaError(std::string("scenario schema: ") + ex.what());
  }

  // cross-checks
  if (s.warehouses < 1) throw SchemaError("warehouses must be >= 1");
  for (const auto& f : s.fields) {
    long want = 1;
    for (const auto& sym : f.shape) want *= s.dim_size(sym);
    if (static_cast<long>(f.data.size()) != want) {
      throw SchemaError("field '" + f.name + "' has " +
                        std::to_string(f.data.size()) + " values, expected " +
                        std::to_string(want));
    }
  }
  long n = s.dims.size();
  if (s.counterparty.demand.empty()) {
    s.counterparty.demand = fill(static_cast<size_t>(n), 0.0);
  }
  if (static_cast<long>(s.counterparty.demand.size()) != n) {
    throw SchemaError("counterparty demand must have items*nodes*periods entries");
  }

  // bind and validate the reference formulation against the data dictionary
  std::vector<std::pair<std::string, std::vector<double>>> bound;
  for (const auto& f : s.fields) bound.emplace_back(f.name, f.data);
  try {
    bind_parameters(s.reference, bound);
  } catch (const std::invalid_argument& ex) {
    throw SchemaError(ex.what());
  }
  for (const auto& p : s.reference.parameters) {
    if (!s.find_field(p.source_field)) {
      throw SchemaError("parameter '" + p.name + "' binds to unknown field '" +
                        p.source_field + "'");
    }
  }
  auto rep = validate(s.reference);
  if (!rep.ok()) {
    throw SchemaError("reference formulation invalid: " + rep.errors.front());
  }
  const Variable* pub = s.reference.public_variable();
  long pub_count = 1;
  for (const auto& set : pub->shape) pub_count *= s.reference.find_set(set)->size;
  if (pub_count != n) {
    throw SchemaError("reference public variable does not span scenario dims");
  }
  if (s.expectations.sense != "cost_min") {
    throw SchemaError("unsupported sense '" + s.expectations.sense + "'");
  }
  return s;
}

nlohmann::json scenario_to_json(const ScenarioSpec& s) {
  json j;
  j["schema_version"] = 1;
  j["name"] = s.name;
  j["tags"] = s.tags;
  j["dims"] = json{{"items", s.dims.items},
                   {"nodes", s.dims.nodes},
                   {"periods", s.dims.periods},
                   {"warehouses", s.warehouses}};
  j["nl_text"] = s.nl_text;
  json fields = json::array();
  for (const auto& f : s.fields) {
    fields.push_back(json{{"name", f.name},
                          {"shape", f.shape},
                          {"role", field_role_name(f.role)},
                          {"data", f.data}});
  }
  j["fields"] = fields;
  j["reference_formulation"] = ir_to_json(canonical(s.reference));
  j["counterparty"] = json{{"holding_cost", s.counterparty.holding_cost},
                           {"backlog_penalty", s.counterparty.backlog_penalty},
                           {"terminal_weight", s.counterparty.terminal_weight},
                           {"safety_stock", s.counterparty.safety_stock},
                           {"demand", s.counterparty.demand},
                           {"initial_inventory", s.counterparty.initial_inventory}};
  json e;
  e["nontrivial_plan"] = s.expectations.nontrivial_plan;
  if (s.expectations.total_demand) {
    e["total_demand"] = *s.expectations.total_demand;
  } else {
    e["total_demand"] = nullptr;
  }
  e["expected_roles"] = s.expectations.expected_roles;
  e["pure_variable_cost"] = s.expectations.pure_variable_cost;
  e["sense"] = s.expectations.sense;
  j["expectations"] = e;
  return j;
}

std::string emit_scenario(const ScenarioSpec& s) {
  return scenario_to_json(s).dump(2) + "\n";
}

ScenarioSpec load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw ParseError("cannot open scenario file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& ex) {
    throw ParseError("cannot parse '" + path + "': " + ex.what());
  }
  return scenario_from_json(j);
}

// --- shared IR assembly ------------------------------------------------------------

namespace {

std::vector<IndexSet> standard_sets(const Dims& dims, int warehouses) {
  return {IndexSet{"item", dims.items, DimKind::item},
          IndexSet{"node", dims.nodes, DimKind::node},
          IndexSet{"period", dims.periods, DimKind::period},
          IndexSet{"warehouse", warehouses, DimKind::warehouse}};
}

Variable public_po() {
  return Variable{"po", {"item", "node", "period"}, Visibility::public_decision,
                  0.0, kInf, "purchase_order"};
}

Variable ship_var() {
  return Variable{"ship", {"item", "warehouse", "node", "period"},
                  Visibility::private_decision, 0.0, kInf, "shipment"};
}

Variable inv_var() {
  return Variable{"inv", {"item", "warehouse", "period"},
                  Visibility::private_decision, 0.0, kInf, "inventory"};
}

LinearConstraint order_aggregation() {
  LinearConstraint agg;
  agg.name = "order_aggregation";
  agg.quantifiers = {{"i", "item"}, {"j", "node"}, {"t", "period"}};
  agg.lhs = {{CoefExpr::lit(1.0), {"po", idx({S("i"), S("j"), S("t")})}},
             {CoefExpr::lit(-1.0), {"ship", idx({S("i"), S("w"), S("j"), S("t")})}}};
  agg.relation = Relation::eq;
  return agg;
}

/// inv[t] = inv[t-1] + inflow[t] - sum_j ship[t], seeded by the initial stock.
LinearConstraint inventory_balance() {
  LinearConstraint bal;
  bal.name = "inventory_balance";
  bal.quantifiers = {{"a", "item"}, {"w", "warehouse"}, {"t", "period"}};
  bal.lhs = {{CoefExpr::lit(1.0), {"inv", idx({S("a"), S("w"), S("t")})}},
             {CoefExpr::lit(-1.0), {"inv", idx({S("a"), S("w"), IndexRef::sym("t", -1)})}},
             {CoefExpr::lit(1.0), {"ship", idx({S("a"), S("w"), S("j"), S("t")})}}};
  bal.relation = Relation::eq;
  CoefExpr init;
  init.params = {ParamRef{"first_week", idx({S("t")})},
                 ParamRef{"initial_inventory", idx({S("a"), S("w")})}};
  CoefExpr inflow;
  inflow.params = {ParamRef{"procurement", idx({S("a"), S("w"), S("t")})}};
  bal.rhs.terms = {init, inflow};
  return bal;
}

ObjectiveTerm linear_cost(const std::string& name, CoefExpr coef, VarRef var) {
  ObjectiveTerm t;
  t.name = name;
  t.kind = TermKind::linear_var;
  t.coef = std::move(coef);
  t.var_a = std::move(var);
  return t;
}

/// Holding charged on end-of-week stock for the weeks that carry over
/// (all but the last), via the carry_mask field.
ObjectiveTerm holding_term() {
  CoefExpr c;
  c.params = {ParamRef{"holding_cost", {}}, ParamRef{"carry_mask", idx({S("t")})}};
  return linear_cost("holding", c, VarRef{"inv", idx({S("a"), S("w"), S("t")})});
}

std::vector<double> mask_first(int n) {
  std::vector<double> m(static_cast<size_t>(n), 0.0);
  m[0] = 1.0;
  return m;
}

std::vector<double> mask_carry(int n) {
  std::vector<double> m(static_cast<size_t>(n), 1.0);
  m[static_cast<size_t>(n) - 1] = 0.0;
  return m;
}

}  // namespace

// --- shipped scenarios ---------------------------------------------------------------

ScenarioSpec example1() {
  ScenarioSpec s;
  s.name = "example1_transport";
  s.tags = {"QP", "order_aggregation", "warehouse_capacity", "transport_cost"};
  s.dims = Dims(2, 2, 3);
  s.warehouses = 1;
  s.nl_text =
      "A vendor ships two products out of a single warehouse to two retail "
      "inbound nodes across a three-week horizon. Outbound shipping is capped "
      "at 150 units per product per week. Moving one unit costs $2 to node 1 "
      "and $3 to node 2. The vendor wants the cheapest shipping plan that "
      "respects the outbound cap.";

  s.fields = {
      FieldMeta{"transport_cost", {"J"}, FieldRoleKind::cost, {2.0, 3.0}},
      FieldMeta{"warehouse_capacity", {}, FieldRoleKind::capacity, {150.0}},
  };

  FormulationIR ir;
  ir.name = "example1_reference";
  ir.sets = standard_sets(s.dims, s.warehouses);
  ir.parameters = {
      Parameter{"transport_cost", {"node"}, "transport_cost", {}},
      Parameter{"warehouse_capacity", {}, "warehouse_capacity", {}},
  };
  ir.variables = {public_po(), ship_var()};
  ir.constraints.push_back(order_aggregation());

  LinearConstraint cap;
  cap.name = "outbound_capacity";
  cap.quantifiers = {{"i", "item"}, {"w", "warehouse"}, {"t", "period"}};
  cap.lhs = {{CoefExpr::lit(1.0), {"ship", idx({S("i"), S("w"), S("j"), S("t")})}}};
  cap.relation = Relation::le;
  cap.rhs.terms = {CoefExpr::param("warehouse_capacity")};
  ir.constraints.push_back(cap);

  ir.objective.push_back(linear_cost(
      "transport", CoefExpr::param("transport_cost", idx({S("j")})),
      VarRef{"ship", idx({S("i"), S("w"), S("j"), S("t")})}));
  s.reference = std::move(ir);

  s.counterparty.demand = {
      // item 0: node 0 then node 1, three weeks each
      20, 25, 30, 15, 20, 25,
      // item 1
      30, 20, 10, 10, 15, 20,
  };
  s.counterparty.initial_inventory = fill(4, 0.0);

  s.expectations.nontrivial_plan = true;
  s.expectations.total_demand = 240.0;
  s.expectations.expected_roles = {"shipment"};
  s.expectations.pure_variable_cost = true;

  std::vector<std::pair<std::string, std::vector<double>>> bound;
  for (const auto& f : s.fields) bound.emplace_back(f.name, f.data);
  bind_parameters(s.reference, bound);
  return s;
}

ScenarioSpec example2() {
  ScenarioSpec s;
  s.name = "example2_shared_lines";
  s.tags = {"QP", "order_aggregation", "inventory_balance", "shared_capacity",
            "ambiguous_nl"};
  s.dims = Dims(3, 2, 3);
  s.warehouses = 2;
  s.nl_text =
      "Two warehouses serve two retail docks with three products over three "
      "weeks. Unit production costs are $0.15, $0.25 and $0.20 for products "
      "A, B and C; every lane ships at $0.10 per unit and storage runs $0.20 "
      "per unit per week carried. Each warehouse starts with 40 units of "
      "every product and receives another 25 units of each per week. "
      "Products A and B share a production line good for 100 units per "
      "warehouse per week, product C has its own line rated 80, and each "
      "warehouse can push at most 150 units out per week in total. Keep "
      "costs down.";

  const size_t aw = 6, awt = 18;
  s.fields = {
      FieldMeta{"production_cost", {"A"}, FieldRoleKind::cost, {0.15, 0.25, 0.20}},
      FieldMeta{"transport_cost_per_unit", {}, FieldRoleKind::cost, {0.10}},
      FieldMeta{"holding_cost", {}, FieldRoleKind::cost, {0.20}},
      FieldMeta{"initial_inventory", {"A", "W"}, FieldRoleKind::inventory, fill(aw, 40.0)},
      FieldMeta{"procurement", {"A", "W", "T"}, FieldRoleKind::inflow, fill(awt, 25.0)},
      FieldMeta{"shared_line_capacity", {}, FieldRoleKind::capacity, {100.0}},
      FieldMeta{"dedicated_line_capacity", {}, FieldRoleKind::capacity, {80.0}},
      FieldMeta{"outbound_capacity", {}, FieldRoleKind::capacity, {150.0}},
      FieldMeta{"shared_line_mask", {"A"}, FieldRoleKind::other, {1.0, 1.0, 0.0}},
      FieldMeta{"dedicated_line_mask", {"A"}, FieldRoleKind::other, {0.0, 0.0, 1.0}},
      FieldMeta{"carry_mask", {"T"}, FieldRoleKind::other, mask_carry(3)},
      FieldMeta{"first_week", {"T"}, FieldRoleKind::other, mask_first(3)},
  };

  FormulationIR ir;
  ir.name = "example2_reference";
  ir.sets = standard_sets(s.dims, s.warehouses);
  ir.parameters = {
      Parameter{"production_cost", {"item"}, "production_cost", {}},
      Parameter{"transport_cost", {}, "transport_cost_per_unit", {}},
      Parameter{"holding_cost", {}, "holding_cost", {}},
      Parameter{"initial_inventory", {"item", "warehouse"}, "initial_inventory", {}},
      Parameter{"procurement", {"item", "warehouse", "period"}, "procurement", {}},
      Parameter{"shared_line_capacity", {}, "shared_line_capacity", {}},
      Parameter{"dedicated_line_capacity", {}, "dedicated_line_capacity", {}},
      Parameter{"outbound_capacity", {}, "outbound_capacity", {}},
      Parameter{"shared_line_mask", {"item"}, "shared_line_mask", {}},
      Parameter{"dedicated_line_mask", {"item"}, "dedicated_line_mask", {}},
      Parameter{"carry_mask", {"period"}, "carry_mask", {}},
      Parameter{"first_week", {"period"}, "first_week", {}},
  };
  ir.variables = {public_po(), ship_var(), inv_var()};
  ir.constraints.push_back(order_aggregation());
  ir.constraints.push_back(inventory_balance());

  // the corrected reading: line capacity governs the fulfilled flow
  LinearConstraint shared;
  shared.name = "shared_line";
  shared.quantifiers = {{"w", "warehouse"}, {"t", "period"}};
  shared.lhs = {{CoefExpr::param("shared_line_mask", idx({S("a")})),
                 {"ship", idx({S("a"), S("w"), S("j"), S("t")})}}};
  shared.relation = Relation::le;
  shared.rhs.terms = {CoefExpr::param("shared_line_capacity")};
  ir.constraints.push_back(shared);

  LinearConstraint dedicated = shared;
  dedicated.name = "dedicated_line";
  dedicated.lhs[0].coef = CoefExpr::param("dedicated_line_mask", idx({S("a")}));
  dedicated.rhs.terms = {CoefExpr::param("dedicated_line_capacity")};
  ir.constraints.push_back(dedicated);

  LinearConstraint outbound;
  outbound.name = "outbound_capacity";
  outbound.quantifiers = {{"w", "warehouse"}, {"t", "period"}};
  outbound.lhs = {{CoefExpr::lit(1.0), {"ship", idx({S("a"), S("w"), S("j"), S("t")})}}};
  outbound.relation = Relation::le;
  outbound.rhs.terms = {CoefExpr::param("outbound_capacity")};
  ir.constraints.push_back(outbound);

  ir.objective.push_back(linear_cost(
      "production", CoefExpr::param("production_cost", idx({S("a")})),
      VarRef{"ship", idx({S("a"), S("w"), S("j"), S("t")})}));
  ir.objective.push_back(linear_cost(
      "transport", CoefExpr::param("transport_cost"),
      VarRef{"ship", idx({S("a"), S("w"), S("j"), S("t")})}));
  ir.objective.push_back(holding_term());
  s.reference = std::move(ir);

  s.counterparty.demand = {
      // product A: node 0, node 1
      12, 15, 18, 10, 12, 14,
      // product B
      8, 10, 12, 14, 12, 10,
      // product C
      16, 14, 12, 9, 11, 13,
  };
  s.counterparty.initial_inventory = fill(6, 0.0);

  s.expectations.nontrivial_plan = true;
  s.expectations.total_demand = 222.0;
  s.expectations.expected_roles = {"shipment", "inventory"};
  s.expectations.pure_variable_cost = false;

  std::vector<std::pair<std::string, std::vector<double>>> bound;
  for (const auto& f : s.fields) bound.emplace_back(f.name, f.data);
  bind_parameters(s.reference, bound);
  return s;
}

FormulationIR example2_buggy_production_ir() {
  ScenarioSpec base = example2();
  FormulationIR ir = base.reference;
  ir.name = "example2_buggy_production";

  Variable prod{"prod", {"item", "warehouse", "period"},
                Visibility::private_decision, 0.0, kInf, "production"};
  ir.variables.push_back(prod);

  for (auto& c : ir.constraints) {
    if (c.name == "inventory_balance") {
      // a second, controllable supply channel next to the fixed inflow
      c.lhs.push_back({CoefExpr::lit(-1.0), {"prod", idx({S("a"), S("w"), S("t")})}});
    } else if (c.name == "shared_line") {
      c.lhs = {{CoefExpr::param("shared_line_mask", idx({S("a")})),
                {"prod", idx({S("a"), S("w"), S("t")})}}};
    } else if (c.name == "dedicated_line") {
      c.lhs = {{CoefExpr::param("dedicated_line_mask", idx({S("a")})),
                {"prod", idx({S("a"), S("w"), S("t")})}}};
    }
  }
  for (auto& t : ir.objective) {
    if (t.name == "production") {
      t.var_a = VarRef{"prod", idx({S("a"), S("w"), S("t")})};
    }
  }
  return ir;
}

ScenarioSpec example3() {
  ScenarioSpec s;
  s.name = "example3_congestion";
  s.tags = {"QP", "order_aggregation", "inventory_balance", "congestion_cost",
            "ambiguous_nl"};
  s.dims = Dims(2, 2, 3);
  s.warehouses = 2;
  s.nl_text =
      "A pair of warehouses feeds two receiving docks with two product lines "
      "over three weeks. Making a unit costs about $0.30. Every warehouse "
      "opens the window with 50 units of each product and suppliers drop off "
      "another 30 of each per week. Storage is $0.40 per unit per week "
      "carried. A shipped unit pays a $1.50 base rate, and busy lanes get "
      "pricier: add a congestion charge of 0.02 per unit squared on top of "
      "the base rate.";

  const size_t aw = 4, awt = 12;
  s.fields = {
      FieldMeta{"production_cost", {}, FieldRoleKind::cost, {0.30}},
      FieldMeta{"initial_inventory", {"A", "W"}, FieldRoleKind::inventory, fill(aw, 50.0)},
      FieldMeta{"procurement", {"A", "W", "T"}, FieldRoleKind::inflow, fill(awt, 30.0)},
      FieldMeta{"holding_cost", {}, FieldRoleKind::cost, {0.40}},
      FieldMeta{"base_transport_cost", {}, FieldRoleKind::cost, {1.50}},
      FieldMeta{"congestion_factor", {}, FieldRoleKind::cost, {0.02}},
      FieldMeta{"carry_mask", {"T"}, FieldRoleKind::other, mask_carry(3)},
      FieldMeta{"first_week", {"T"}, FieldRoleKind::other, mask_first(3)},
  };

  FormulationIR ir;
  ir.name = "example3_reference";
  ir.sets = standard_sets(s.dims, s.warehouses);
  ir.parameters = {
      Parameter{"production_cost", {}, "production_cost", {}},
      Parameter{"initial_inventory", {"item", "warehouse"}, "initial_inventory", {}},
      Parameter{"procurement", {"item", "warehouse", "period"}, "procurement", {}},
      Parameter{"holding_cost", {}, "holding_cost", {}},
      Parameter{"base_transport_cost", {}, "base_transport_cost", {}},
      Parameter{"congestion_factor", {}, "congestion_factor", {}},
      Parameter{"carry_mask", {"period"}, "carry_mask", {}},
      Parameter{"first_week", {"period"}, "first_week", {}},
  };
  ir.variables = {public_po(), ship_var(), inv_var()};
  ir.constraints.push_back(order_aggregation());
  ir.constraints.push_back(inventory_balance());

  VarRef ship_ref{"ship", idx({S("a"), S("w"), S("j"), S("t")})};
  ir.objective.push_back(
      linear_cost("production", CoefExpr::param("production_cost"), ship_ref));
  ir.objective.push_back(
      linear_cost("base_transport", CoefExpr::param("base_transport_cost"), ship_ref));

  ObjectiveTerm congestion;
  congestion.name = "congestion";
  congestion.kind = TermKind::quadratic_var;
  congestion.coef = CoefExpr::param("congestion_factor");
  congestion.var_a = ship_ref;
  congestion.var_b = ship_ref;
  ir.objective.push_back(congestion);

  ir.objective.push_back(holding_term());
  s.reference = std::move(ir);

  s.counterparty.demand = {
      // product 0: node 0, node 1
      15, 18, 20, 12, 16, 18,
      // product 1
      20, 15, 10, 10, 14, 16,
  };
  s.counterparty.initial_inventory = fill(4, 0.0);

  s.expectations.nontrivial_plan = true;
  s.expectations.total_demand = 184.0;
  s.expectations.expected_roles = {"shipment", "inventory"};
  s.expectations.pure_variable_cost = false;

  std::vector<std::pair<std::string, std::vector<double>>> bound;
  for (const auto& f : s.fields) bound.emplace_back(f.name, f.data);
  bind_parameters(s.reference, bound);
  return s;
}

std::vector<ScenarioSpec> shipped_scenarios() {
  return {example1(), example2(), example3()};
}

// --- generator ---------------------------------------------------------------------

std::string generator_template_name(GeneratorTemplate t) {
  switch (t) {
    case GeneratorTemplate::transport: return "transport";
    case GeneratorTemplate::inventory: return "inventory";
    case GeneratorTemplate::shared_capacity: return "shared_capacity";
    case GeneratorTemplate::congestion: return "congestion";
  }
  return "?";
}

GeneratorTemplate generator_template_from_name(const std::string& s) {
  if (s == "transport") return GeneratorTemplate::transport;
  if (s == "inventory") return GeneratorTemplate::inventory;
  if (s == "shared_capacity") return GeneratorTemplate::shared_capacity;
  if (s == "congestion") return GeneratorTemplate::congestion;
  throw std::invalid_argument("unknown generator template '" + s + "'");
}

ScenarioSpec generate_scenario(GeneratorTemplate tmpl, const Dims& dims,
                               int warehouses, std::uint64_t seed) {
  if (dims.items > 5 || dims.nodes > 5 || dims.periods > 5 || warehouses > 5) {
    throw std::invalid_argument("generate_scenario: dims must stay <= 5");
  }
  std::mt19937_64 rng(seed * 2654435761u + static_cast<std::uint64_t>(tmpl));
  auto uni = [&](double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return round2(d(rng));
  };
  auto uni_int = [&](int lo, int hi) {
    std::uniform_int_distribution<int> d(lo, hi);
    return static_cast<double>(d(rng));
  };

  ScenarioSpec s;
  const long n = dims.size();
  const long naw = static_cast<long>(dims.items) * warehouses;
  const long nawt = naw * dims.periods;
  std::ostringstream name;
  name << "gen_" << generator_template_name(tmpl) << "_a" << dims.items << "j"
       << dims.nodes << "t" << dims.periods << "w" << warehouses << "_seed" << seed;
  s.name = name.str();
  s.dims = dims;
  s.warehouses = warehouses;

  std::vector<double> demand(static_cast<size_t>(n));
  for (auto& d : demand) d = uni_int(5, 25);
  s.counterparty.demand = demand;
  s.counterparty.initial_inventory = fill(static_cast<size_t>(dims.items * dims.nodes), 0.0);
  double total_demand = 0;
  for (double d : demand) total_demand += d;

  FormulationIR ir;
  ir.sets = standard_sets(dims, warehouses);
  ir.variables = {public_po(), ship_var()};
  ir.constraints.push_back(order_aggregation());

  auto add_scalar_field = [&](const std::string& fname, FieldRoleKind role, double v) {
    s.fields.push_back(FieldMeta{fname, {}, role, {v}});
  };

  VarRef ship_ref{"ship", idx({S("a"), S("w"), S("j"), S("t")})};

  if (tmpl == GeneratorTemplate::transport) {
    std::vector<double> costs(static_cast<size_t>(dims.nodes));
    for (auto& c : costs) c = uni(1.0, 4.0);
    double cap = uni_int(120, 240);
    s.fields.push_back(FieldMeta{"transport_cost", {"J"}, FieldRoleKind::cost, costs});
    add_scalar_field("warehouse_capacity", FieldRoleKind::capacity, cap);
    ir.parameters = {Parameter{"transport_cost", {"node"}, "transport_cost", {}},
                     Parameter{"warehouse_capacity", {}, "warehouse_capacity", {}}};

    LinearConstraint cap_c;
    cap_c.name = "outbound_capacity";
    cap_c.quantifiers = {{"a", "item"}, {"w", "warehouse"}, {"t", "period"}};
    cap_c.lhs = {{CoefExpr::lit(1.0), {"ship", idx({S("a"), S("w"), S("j"), S("t")})}}};
    cap_c.relation = Relation::le;
    cap_c.rhs.terms = {CoefExpr::param("warehouse_capacity")};
    ir.constraints.push_back(cap_c);

    ir.objective.push_back(linear_cost(
        "transport", CoefExpr::param("transport_cost", idx({S("j")})), ship_ref));

    s.tags = {"QP", "order_aggregation", "warehouse_capacity", "transport_cost"};
    s.expectations.expected_roles = {"shipment"};
    s.expectations.pure_variable_cost = true;
    std::ostringstream nl;
    nl << "A vendor ships " << dims.items << " products from " << warehouses
       << " warehouse(s) to " << dims.nodes << " nodes over " << dims.periods
       << " weeks; outbound is capped at " << cap
       << " units per product, warehouse and week, and per-unit lane costs are "
          "listed in transport_cost. Minimize transport spend.";
    s.nl_text = nl.str();
  } else {
    // inventory-backed templates share the balance core
    std::vector<double> prod_cost(static_cast<size_t>(dims.items));
    for (auto& c : prod_cost) c = uni(0.1, 0.6);
    double transport = uni(0.05, 0.3);
    double holding = uni(0.2, 0.5);
    double init = uni_int(20, 60);
    double inflow = uni_int(15, 35);
    double outbound = uni_int(100, 250);

    s.fields.push_back(
        FieldMeta{"production_cost", {"A"}, FieldRoleKind::cost, prod_cost});
    add_scalar_field("transport_cost_per_unit", FieldRoleKind::cost, transport);
    add_scalar_field("holding_cost", FieldRoleKind::cost, holding);
    s.fields.push_back(FieldMeta{"initial_inventory", {"A", "W"},
                                 FieldRoleKind::inventory,
                                 fill(static_cast<size_t>(naw), init)});
    s.fields.push_back(FieldMeta{"procurement", {"A", "W", "T"}, FieldRoleKind::inflow,
                                 fill(static_cast<size_t>(nawt), inflow)});
    add_scalar_field("outbound_capacity", FieldRoleKind::capacity, outbound);
    s.fields.push_back(
        FieldMeta{"carry_mask", {"T"}, FieldRoleKind::other, mask_carry(dims.periods)});
    s.fields.push_back(
        FieldMeta{"first_week", {"T"}, FieldRoleKind::other, mask_first(dims.periods)});

    ir.parameters = {
        Parameter{"production_cost", {"item"}, "production_cost", {}},
        Parameter{"transport_cost", {}, "transport_cost_per_unit", {}},
        Parameter{"holding_cost", {}, "holding_cost", {}},
        Parameter{"initial_inventory", {"item", "warehouse"}, "initial_inventory", {}},
        Parameter{"procurement", {"item", "warehouse", "period"}, "procurement", {}},
        Parameter{"outbound_capacity", {}, "outbound_capacity", {}},
        Parameter{"carry_mask", {"period"}, "carry_mask", {}},
        Parameter{"first_week", {"period"}, "first_week", {}},
    };
    ir.variables.push_back(inv_var());
    ir.constraints.push_back(inventory_balance());

    LinearConstraint out_c;
    out_c.name = "outbound_capacity";
    out_c.quantifiers = {{"w", "warehouse"}, {"t", "period"}};
    out_c.lhs = {{CoefExpr::lit(1.0), {"ship", idx({S("a"), S("w"), S("j"), S("t")})}}};
    out_c.relation = Relation::le;
    out_c.rhs.terms = {CoefExpr::param("outbound_capacity")};
    ir.constraints.push_back(out_c);

    ir.objective.push_back(linear_cost(
        "production", CoefExpr::param("production_cost", idx({S("a")})), ship_ref));
    ir.objective.push_back(
        linear_cost("transport", CoefExpr::param("transport_cost"), ship_ref));
    ir.objective.push_back(holding_term());

    s.tags = {"QP", "order_aggregation", "inventory_balance"};
    s.expectations.expected_roles = {"shipment", "inventory"};
    s.expectations.pure_variable_cost = false;

    if (tmpl == GeneratorTemplate::shared_capacity) {
      double shared_cap = uni_int(60, 120);
      std::vector<double> mask(static_cast<size_t>(dims.items), 0.0);
      for (int a = 0; a < (dims.items + 1) / 2; ++a) mask[static_cast<size_t>(a)] = 1.0;
      add_scalar_field("shared_line_capacity", FieldRoleKind::capacity, shared_cap);
      s.fields.push_back(
          FieldMeta{"shared_line_mask", {"A"}, FieldRoleKind::other, mask});
      ir.parameters.push_back(
          Parameter{"shared_line_capacity", {}, "shared_line_capacity", {}});
      ir.parameters.push_back(
          Parameter{"shared_line_mask", {"item"}, "shared_line_mask", {}});
      LinearConstraint shared;
      shared.name = "shared_line";
      shared.quantifiers = {{"w", "warehouse"}, {"t", "period"}};
      shared.lhs = {{CoefExpr::param("shared_line_mask", idx({S("a")})),
                     {"ship", idx({S("a"), S("w"), S("j"), S("t")})}}};
      shared.relation = Relation::le;
      shared.rhs.terms = {CoefExpr::param("shared_line_capacity")};
      ir.constraints.push_back(shared);
      s.tags.push_back("shared_capacity");
    }

    if (tmpl == GeneratorTemplate::congestion) {
      double factor = uni(0.01, 0.05);
      add_scalar_field("congestion_factor", FieldRoleKind::cost, factor);
      ir.parameters.push_back(
          Parameter{"congestion_factor", {}, "congestion_factor", {}});
      ObjectiveTerm congestion;
      congestion.name = "congestion";
      congestion.kind = TermKind::quadratic_var;
      congestion.coef = CoefExpr::param("congestion_factor");
      congestion.var_a = ship_ref;
      congestion.var_b = ship_ref;
      ir.objective.push_back(congestion);
      s.tags.push_back("congestion_cost");
    }

    std::ostringstream nl;
    nl << "A vendor runs " << warehouses << " warehouse(s) holding "
       << dims.items << " products for " << dims.nodes << " docks over "
       << dims.periods
       << " weeks. Stock starts at the listed levels, suppliers deliver a "
          "fixed weekly inflow, storage is charged per carried unit and week, "
          "and fulfilled units pay production plus lane costs. Keep total "
          "cost down.";
    s.nl_text = nl.str();
  }

  ir.name = s.name + "_reference";
  s.reference = std::move(ir);

  s.expectations.nontrivial_plan = total_demand > 0;
  s.expectations.total_demand = total_demand;

  std::vector<std::pair<std::string, std::vector<double>>> bound;
  for (const auto& f : s.fields) bound.emplace_back(f.name, f.data);
  bind_parameters(s.reference, bound);
  return s;
}

// --- centralized joint problem --------------------------------------------------------

CompiledQP build_centralized(const FormulationIR& vendor_ir,
                             const CounterpartyParams& cp, const Dims& dims) {
  CompiledQP v = compile_base(vendor_ir);
  CompiledQP c = compile_base(counterparty_ir(cp, dims));
  const VarSlice vpub = v.public_slice();
  const VarSlice cpub = c.public_slice();
  if (vpub.count != dims.size() || cpub.count != dims.size()) {
    throw DimsMismatch("build_centralized: public blocks do not match dims");
  }

  const long npub = vpub.count;
  CompiledQP out;
  out.n = npub + (v.n - npub) + (c.n - npub);
  out.Q = Eigen::MatrixXd::Zero(out.n, out.n);
  out.q = Eigen::VectorXd::Zero(out.n);
  out.lb = Eigen::VectorXd::Constant(out.n, -kInf);
  out.ub = Eigen::VectorXd::Constant(out.n, kInf);
  out.constant = v.constant + c.constant;

  // column maps: shared public block first, then each party's privates
  auto build_map = [&](const CompiledQP& qp, const VarSlice& pub, long priv_base) {
    std::vector<long> map(static_cast<size_t>(qp.n));
    long next = priv_base;
    for (long col = 0; col < qp.n; ++col) {
      if (col >= pub.offset && col < pub.offset + pub.count) {
        map[static_cast<size_t>(col)] = col - pub.offset;
      } else {
        map[static_cast<size_t>(col)] = next++;
      }
    }
    return map;
  };
  std::vector<long> vmap = build_map(v, vpub, npub);
  std::vector<long> cmap = build_map(c, cpub, npub + (v.n - npub));

  auto accumulate = [&](const CompiledQP& qp, const std::vector<long>& map) {
    for (long i = 0; i < qp.n; ++i) {
      out.q[map[static_cast<size_t>(i)]] += qp.q[i];
      for (long j = 0; j < qp.n; ++j) {
        double val = qp.Q(i, j);
        if (val != 0.0) out.Q(map[static_cast<size_t>(i)], map[static_cast<size_t>(j)]) += val;
      }
      long col = map[static_cast<size_t>(i)];
      out.lb[col] = std::max(out.lb[col], qp.lb[i]);
      out.ub[col] = std::min(out.ub[col], qp.ub[i]);
    }
  };
  accumulate(v, vmap);
  accumulate(c, cmap);

  long rows = v.A.rows() + c.A.rows();
  out.A = Eigen::MatrixXd::Zero(rows, out.n);
  out.rhs.resize(rows);
  long r = 0;
  auto add_rows = [&](const CompiledQP& qp, const std::vector<long>& map) {
    for (long i = 0; i < qp.A.rows(); ++i) {
      for (long j = 0; j < qp.n; ++j) {
        double val = qp.A(i, j);
        if (val != 0.0) out.A(r, map[static_cast<size_t>(j)]) = val;
      }
      out.rhs[r] = qp.rhs[i];
      out.relations.push_back(qp.relations[static_cast<size_t>(i)]);
      ++r;
    }
  };
  add_rows(v, vmap);
  add_rows(c, cmap);

  out.public_var = v.public_var;
  VarSlice pub_slice;
  pub_slice.offset = 0;
  pub_slice.count = npub;
  pub_slice.sizes = {dims.items, dims.nodes, dims.periods};
  out.vars[out.public_var] = pub_slice;

  return out;
}

CentralizedSolution solve_centralized(const FormulationIR& vendor_ir,
                                      const CounterpartyParams& cp, const Dims& dims,
                                      double tol) {
  CompiledQP joint = build_centralized(vendor_ir, cp, dims);
  QPSolution sol = solve_qp(joint, tol, 200000);
  CentralizedSolution out;
  out.status = sol.status;
  out.objective = sol.objective;
  if (sol.status == QPStatus::optimal) {
    out.plan = PlanTensor(dims, sol.primal.head(dims.size()).array().max(0.0));
  } else {
    out.plan = PlanTensor::zeros(dims);
  }
  return out;
}

}  // namespace optiloop
