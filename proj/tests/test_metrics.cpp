#include "optiloop/metrics.hpp"

#include "optiloop/qpsolver.hpp"

#include <doctest.h>

using namespace optiloop;

TEST_CASE("standard probes are reference-feasible and span regimes") {
  for (const auto& s : shipped_scenarios()) {
    auto probes = standard_probes(s, 7);
    REQUIRE(probes.size() == 5);
    CHECK(norm2(probes[0]) == 0.0);
    for (const auto& p : probes) {
      CHECK(eval_private(s.reference, p).feasible());
    }
    CHECK(probes[1].sum() > 0.0);
  }
}

TEST_CASE("reference against itself scores an exact zero gap") {
  for (const auto& s : shipped_scenarios()) {
    auto probes = standard_probes(s, 7);
    auto [match, gap] = objective_metrics(s.reference, s.reference, probes);
    CHECK(match);
    CHECK(gap == 0.0);
  }
}

TEST_CASE("sub-0.1% relative errors still count as a match") {
  auto s = example1();
  auto candidate = s.reference;
  // pure linear objective: scaling the cost data scales every probe value
  for (auto& p : candidate.parameters) {
    if (p.name == "transport_cost") {
      for (auto& v : p.values) v *= 1.0005;
    }
  }
  auto probes = standard_probes(s, 7);
  std::vector<double> errors;
  auto [match, gap] = objective_metrics(candidate, s.reference, probes, &errors);
  CHECK(match);
  CHECK(gap > 0.0);
  CHECK(gap < 0.1);
  for (double e : errors) CHECK(e < 1e-3);
}

TEST_CASE("large errors are capped at 100% per probe") {
  auto s = example1();
  auto candidate = s.reference;
  for (auto& p : candidate.parameters) {
    if (p.name == "transport_cost") {
      for (auto& v : p.values) v *= 3.5;  // rel err 2.5 on every nonzero probe
    }
  }
  auto probes = standard_probes(s, 7);
  std::vector<double> errors;
  auto [match, gap] = objective_metrics(candidate, s.reference, probes, &errors);
  CHECK_FALSE(match);
  // zero probe contributes 0, four nonzero probes contribute min(2.5, 1)
  CHECK(gap == doctest::Approx(80.0).epsilon(1e-9));
  CHECK(gap <= 100.0);
}

TEST_CASE("infeasible candidates take the full per-probe penalty") {
  auto s = example1();
  auto candidate = s.reference;
  for (auto& v : candidate.variables) {
    if (v.visibility == Visibility::public_decision) v.upper = 0.0;
  }
  auto probes = standard_probes(s, 7);
  auto [match, gap] = objective_metrics(candidate, s.reference, probes);
  CHECK_FALSE(match);
  CHECK(gap == doctest::Approx(80.0).epsilon(1e-9));  // feasible only at zero
}

TEST_CASE("social metrics at the centralized plan and at degenerate plans") {
  auto s = example1();
  auto cent = solve_centralized(s.reference, s.counterparty, s.dims);
  REQUIRE(cent.status == QPStatus::optimal);

  auto [match, gap] = social_metrics(cent.plan, s.reference, s.counterparty, s.dims);
  CHECK(match);
  CHECK(gap < 1e-4);

  auto [bad_match, bad_gap] =
      social_metrics(PlanTensor::zeros(s.dims), s.reference, s.counterparty, s.dims);
  CHECK_FALSE(bad_match);
  CHECK(bad_gap > 10.0);
  CHECK(bad_gap <= 100.0);
}

TEST_CASE("match implies gap below a tenth of a percent") {
  auto s = example2();
  auto probes = standard_probes(s, 3);
  auto [match, gap] = objective_metrics(s.reference, s.reference, probes);
  CHECK(match);
  CHECK(gap < 0.1);
}
