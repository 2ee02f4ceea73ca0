#include "optiloop/faults.hpp"

#include "optiloop/evidence.hpp"
#include "optiloop/metrics.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

using namespace optiloop;

TEST_CASE("every transform round-trips through its ground-truth repair") {
  for (const auto& s : shipped_scenarios()) {
    for (FaultKind kind : all_fault_kinds()) {
      if (kind == FaultKind::interface_mismatch) continue;
      FaultSpec spec{kind, "", 42};
      auto c = inject(s.reference, spec, s);
      INFO(s.name << " / " << fault_kind_name(kind));
      CHECK_FALSE(structurally_equal(c.ir, s.reference));
      auto repaired = apply_patch(c.ir, c.ground_truth_repair);
      CHECK(structurally_equal(repaired, s.reference));
    }
  }
}

TEST_CASE("non-interface candidates pass local validation by construction") {
  std::vector<MatrixSkip> skips;
  auto matrix = fault_matrix(shipped_scenarios(), all_fault_kinds(), 42, &skips);
  CHECK(skips.empty());
  CHECK(matrix.size() == 18);
  for (const auto& c : matrix) {
    if (c.kind == FaultKind::interface_mismatch) continue;
    INFO(c.scenario << " / " << fault_kind_name(c.kind));
    CHECK(validate(c.ir).ok());
  }
}

TEST_CASE("transform shapes") {
  auto s = example1();

  SUBCASE("sign_flip negates a cost term") {
    auto c = inject(s.reference, {FaultKind::sign_flip, "", 1}, s);
    bool negated = false;
    for (const auto& t : c.ir.objective) {
      if (t.weight < 0.0) negated = true;
    }
    CHECK(negated);
    CHECK(c.designated_checks == std::vector<int>{1, 2});
  }

  SUBCASE("cost_on_data rewrites the term into fixed data") {
    auto c = inject(s.reference, {FaultKind::cost_on_data, "", 1}, s);
    bool has_const_cost = false;
    for (const auto& t : c.ir.objective) {
      if (t.kind == TermKind::const_data) has_const_cost = true;
    }
    CHECK(has_const_cost);
    CHECK_FALSE(find_cost_data_antipatterns(c.ir, s.field_infos()).empty());
  }

  SUBCASE("missing_cost erases a cost field from the objective") {
    auto c = inject(s.reference, {FaultKind::missing_cost, "", 1}, s);
    auto missing = find_missing_cost_parameters(c.ir, s.field_infos());
    REQUIRE(missing.size() == 1);
    CHECK(missing[0] == "transport_cost");
  }

  SUBCASE("constraint_scope deletes a public-coupling constraint") {
    auto c = inject(s.reference, {FaultKind::constraint_scope, "", 1}, s);
    CHECK(c.ir.constraints.size() == s.reference.constraints.size() - 1);
    auto audit = audit_decision_variables(c.ir, s.expectations.expected_roles);
    CHECK_FALSE(audit.disconnected_variables.empty());
  }

  SUBCASE("degenerate caps the public plan at zero") {
    auto c = inject(s.reference, {FaultKind::degenerate, "", 1}, s);
    const Variable* pub = c.ir.public_variable();
    REQUIRE(pub != nullptr);
    CHECK(pub->upper == 0.0);
  }

  SUBCASE("interface faults leave the formulation intact") {
    auto c = inject(s.reference, {FaultKind::interface_mismatch, "", 1}, s);
    CHECK(structurally_equal(c.ir, s.reference));
    CHECK(c.iface != InterfaceFaultKind::none);
  }
}

TEST_CASE("candidates differ from their source at a probe") {
  auto s = example2();
  auto probes = standard_probes(s, 42);
  for (FaultKind kind : all_fault_kinds()) {
    if (kind == FaultKind::interface_mismatch) continue;
    auto c = inject(s.reference, {kind, "", 42}, s);
    bool distinct = false;
    for (const auto& p : probes) {
      auto a = eval_private(s.reference, p);
      auto b = eval_private(c.ir, p);
      if (a.feasible() != b.feasible() ||
          (a.feasible() && std::abs(a.value - b.value) > 1e-9)) {
        distinct = true;
      }
    }
    INFO(fault_kind_name(kind));
    CHECK(distinct);
  }
}

TEST_CASE("fault matrix is reproducible") {
  auto a = fault_matrix(shipped_scenarios(), all_fault_kinds(), 7);
  auto b = fault_matrix(shipped_scenarios(), all_fault_kinds(), 7);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(fault_metadata_to_json(a[i]) == fault_metadata_to_json(b[i]));
    CHECK(structurally_equal(a[i].ir, b[i].ir));
  }
}

TEST_CASE("degenerate injection is skipped when only a trivial plan is expected") {
  auto s = example1();
  s.counterparty.demand.assign(static_cast<size_t>(s.dims.size()), 0.0);
  s.expectations.nontrivial_plan = false;
  s.expectations.total_demand = 0.0;
  std::vector<MatrixSkip> skips;
  auto matrix = fault_matrix({s}, {FaultKind::degenerate}, 42, &skips);
  CHECK(matrix.empty());
  REQUIRE(skips.size() == 1);
  CHECK(skips[0].kind == FaultKind::degenerate);
}

TEST_CASE("incompatible explicit targets are rejected") {
  auto s = example1();
  CHECK_THROWS_AS(inject(s.reference, {FaultKind::sign_flip, "ghost_term", 1}, s),
                  IncompatibleTarget);
}

TEST_CASE("metadata sidecar round trip") {
  auto s = example3();
  auto c = inject(s.reference, {FaultKind::missing_cost, "", 9}, s);
  auto j = fault_metadata_to_json(c);
  auto back = fault_metadata_from_json(j, c.ir);
  CHECK(back.kind == c.kind);
  CHECK(back.target == c.target);
  CHECK(back.designated_checks == c.designated_checks);
  CHECK(structurally_equal(apply_patch(back.ir, back.ground_truth_repair), s.reference));
}
