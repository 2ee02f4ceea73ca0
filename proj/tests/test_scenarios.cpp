#include "optiloop/scenarios.hpp"

#include "optiloop/coordinator.hpp"
#include "support/active_set_oracle.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <fstream>

using namespace optiloop;

TEST_CASE("shipped scenarios carry the documented data") {
  auto s1 = example1();
  CHECK(s1.dims == Dims(2, 2, 3));
  CHECK(s1.warehouses == 1);
  REQUIRE(s1.find_field("transport_cost") != nullptr);
  CHECK(s1.find_field("transport_cost")->data == std::vector<double>{2.0, 3.0});
  CHECK(s1.find_field("warehouse_capacity")->data == std::vector<double>{150.0});
  CHECK(validate(s1.reference).ok());

  auto s3 = example3();
  CHECK(s3.find_field("congestion_factor")->data == std::vector<double>{0.02});
  CHECK(s3.find_field("base_transport_cost")->data == std::vector<double>{1.5});
  CHECK(validate(s3.reference).ok());

  auto s2 = example2();
  CHECK(s2.dims == Dims(3, 2, 3));
  CHECK(validate(s2.reference).ok());
  CHECK(validate(example2_buggy_production_ir()).ok());
}

TEST_CASE("scenario json round trip") {
  for (const auto& s : shipped_scenarios()) {
    std::string text = emit_scenario(s);
    auto parsed = scenario_from_json(nlohmann::json::parse(text));
    CHECK(parsed.name == s.name);
    CHECK(structurally_equal(parsed.reference, s.reference));
    CHECK(parsed.counterparty.demand == s.counterparty.demand);
    CHECK(emit_scenario(parsed) == text);
  }
}

TEST_CASE("loader errors") {
  CHECK_THROWS_AS(load_scenario("/nonexistent/path.json"), ParseError);

  auto j = scenario_to_json(example1());
  j["fields"][0]["data"] = std::vector<double>{1.0};  // wrong length for (J,)
  CHECK_THROWS_AS(scenario_from_json(j), SchemaError);

  auto j2 = scenario_to_json(example1());
  for (auto& v : j2["reference_formulation"]["variables"]) {
    v["visibility"] = "private";  // drop the public plan entirely
  }
  CHECK_THROWS_AS(scenario_from_json(j2), SchemaError);
}

TEST_CASE("generator is deterministic and structurally sound") {
  Dims dims(2, 2, 3);
  auto a = generate_scenario(GeneratorTemplate::inventory, dims, 2, 99);
  auto b = generate_scenario(GeneratorTemplate::inventory, dims, 2, 99);
  CHECK(emit_scenario(a) == emit_scenario(b));
  CHECK(validate(a.reference).ok());

  bool has_balance_eq = false;
  for (const auto& c : a.reference.constraints) {
    if (c.name == "inventory_balance" && c.relation == Relation::eq) has_balance_eq = true;
  }
  CHECK(has_balance_eq);

  auto cong = generate_scenario(GeneratorTemplate::congestion, dims, 1, 3);
  bool has_quad = false;
  for (const auto& t : cong.reference.objective) {
    if (t.kind == TermKind::quadratic_var) has_quad = true;
  }
  CHECK(has_quad);
  CHECK(validate(cong.reference).ok());

  auto shared = generate_scenario(GeneratorTemplate::shared_capacity, dims, 2, 5);
  CHECK(validate(shared.reference).ok());

  auto transport = generate_scenario(GeneratorTemplate::transport, dims, 1, 11);
  CHECK(transport.expectations.pure_variable_cost);
  CHECK(validate(transport.reference).ok());
}

TEST_CASE("generated reference pairs coordinate to convergence") {
  auto s = generate_scenario(GeneratorTemplate::transport, Dims(2, 2, 2), 1, 42);
  IrAgent vendor("vendor", s.reference);
  auto cp = make_counterparty(s.counterparty, s.dims);
  auto config = CoordinationConfig::defaults(s.dims, CoordinationMode::evaluation);
  auto traj = coord_run({&vendor, cp.get()}, config);
  CHECK(traj.reason == TerminationReason::converged);
}

TEST_CASE("centralized joint problem basics") {
  // nothing to gain anywhere: optimum 0 at x = 0
  ScenarioSpec s = example1();
  CounterpartyParams idle;
  idle.safety_stock = {0.0};
  idle.demand.assign(static_cast<size_t>(s.dims.size()), 0.0);
  auto sol = solve_centralized(s.reference, idle, s.dims);
  REQUIRE(sol.status == QPStatus::optimal);
  CHECK(sol.objective == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(norm2(sol.plan) < 1e-4);
}

TEST_CASE("centralized optimum matches the enumeration oracle at tiny dims") {
  // single item, node, week: small enough for exhaustive active-set search
  Dims dims(1, 1, 1);
  FormulationIR ir;
  ir.name = "tiny_transport";
  ir.sets = {IndexSet{"item", 1, DimKind::item}, IndexSet{"node", 1, DimKind::node},
             IndexSet{"period", 1, DimKind::period},
             IndexSet{"warehouse", 1, DimKind::warehouse}};
  ir.parameters = {Parameter{"transport_cost", {"node"}, "transport_cost", {2.0}},
                   Parameter{"warehouse_capacity", {}, "warehouse_capacity", {150.0}}};
  Variable po{"po", {"item", "node", "period"}, Visibility::public_decision, 0.0,
              std::numeric_limits<double>::infinity(), "purchase_order"};
  Variable ship{"ship", {"item", "warehouse", "node", "period"},
                Visibility::private_decision, 0.0,
                std::numeric_limits<double>::infinity(), "shipment"};
  ir.variables = {po, ship};
  LinearConstraint agg;
  agg.name = "order_aggregation";
  agg.quantifiers = {{"i", "item"}, {"j", "node"}, {"t", "period"}};
  agg.lhs = {{CoefExpr::lit(1.0),
              {"po", {IndexRef::sym("i"), IndexRef::sym("j"), IndexRef::sym("t")}}},
             {CoefExpr::lit(-1.0),
              {"ship",
               {IndexRef::sym("i"), IndexRef::sym("w"), IndexRef::sym("j"),
                IndexRef::sym("t")}}}};
  agg.relation = Relation::eq;
  ir.constraints.push_back(agg);
  ObjectiveTerm transport;
  transport.name = "transport";
  transport.kind = TermKind::linear_var;
  transport.coef = CoefExpr::param("transport_cost", {IndexRef::sym("j")});
  transport.var_a = VarRef{
      "ship", {IndexRef::sym("i"), IndexRef::sym("w"), IndexRef::sym("j"), IndexRef::sym("t")}};
  ir.objective.push_back(transport);

  CounterpartyParams cp;
  cp.demand = {10.0};
  cp.safety_stock = {0.0};

  CompiledQP joint = build_centralized(ir, cp, dims);
  REQUIRE(joint.n <= 6);
  auto oracle = optiloop::testing::active_set_solve(joint);
  REQUIRE(oracle.found);
  auto sol = solve_centralized(ir, cp, dims);
  REQUIRE(sol.status == QPStatus::optimal);
  CHECK(sol.objective == doctest::Approx(oracle.objective).epsilon(1e-6));
}

TEST_CASE("equal consensus copies reproduce the centralized optimum") {
  // pinning both parties to the centralized plan recovers its value
  auto s = example1();
  auto cent = solve_centralized(s.reference, s.counterparty, s.dims);
  REQUIRE(cent.status == QPStatus::optimal);
  auto fv = eval_private(s.reference, cent.plan);
  auto fc = eval_private(counterparty_ir(s.counterparty, s.dims), cent.plan);
  REQUIRE(fv.feasible());
  REQUIRE(fc.feasible());
  CHECK(fv.value + fc.value ==
        doctest::Approx(cent.objective).epsilon(1e-6));
}

TEST_CASE("shipped scenario files on disk match the builders") {
  const char* files[] = {"example1.json", "example2.json", "example3.json"};
  auto builders = shipped_scenarios();
  for (size_t i = 0; i < 3; ++i) {
    std::string path = std::string(OPTILOOP_DATA_DIR) + "/scenarios/" + files[i];
    std::ifstream in(path);
    REQUIRE_MESSAGE(in.good(), path);
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    CHECK(bytes == emit_scenario(builders[i]));
    auto loaded = load_scenario(path);
    CHECK(emit_scenario(loaded) == bytes);
  }
}
