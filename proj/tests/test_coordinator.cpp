#include "optiloop/coordinator.hpp"

#include "support/test_ir.hpp"

#include <doctest.h>

#include <cmath>

using namespace optiloop;
using optiloop::testing::mini_transport_ir;

namespace {

PlanTensor scalarish(double v) {
  return PlanTensor(Dims(1, 1, 1), Eigen::ArrayXd::Constant(1, v));
}

/// Agent that always fails, for the error path.
class BrokenAgent : public Agent {
 public:
  const std::string& name() const override { return name_; }
  AgentResponse solve(const PlanTensor&, const PlanTensor&, const PlanTensor&) const override {
    throw SolveFailed("broken by construction");
  }
  PrivateValue private_value(const PlanTensor&) const override { return {}; }

 private:
  std::string name_ = "broken";
};

}  // namespace

TEST_CASE("z_update is the proposal mean") {
  CHECK(z_update({scalarish(4.0), scalarish(6.0)})[0] == doctest::Approx(5.0));
  CHECK(z_update({scalarish(2.5), scalarish(2.5)})[0] == doctest::Approx(2.5));
  CHECK(z_update({scalarish(3.0)})[0] == doctest::Approx(3.0));
  CHECK_THROWS_AS(z_update({}), std::invalid_argument);
}

TEST_CASE("lambda_update applies the dual ascent step") {
  CHECK(lambda_update(scalarish(0.0), scalarish(1.0), scalarish(0.5), scalarish(0.0))[0] ==
        doctest::Approx(0.5));
  CHECK(lambda_update(scalarish(2.0), scalarish(3.0), scalarish(1.0), scalarish(1.0))[0] ==
        doctest::Approx(2.0));
  CHECK(lambda_update(scalarish(1.0), scalarish(2.0), scalarish(0.75), scalarish(1.0))[0] ==
        doctest::Approx(0.5));
}

TEST_CASE("residuals match their definitions") {
  Dims d(1, 1, 2);
  PlanTensor z(d), e(d);
  z[0] = 1.0;
  z[1] = 2.0;
  e[0] = 0.3;
  e[1] = -0.4;

  auto consensus = residuals({z, z}, z, z, PlanTensor::constant(d, 1.0));
  CHECK(consensus.first == 0.0);
  CHECK(consensus.second == 0.0);

  auto split = residuals({z + e, z - e}, z, z, PlanTensor::constant(d, 1.0));
  CHECK(split.first == doctest::Approx(std::sqrt(2.0) * norm2(e)));

  auto moved = residuals({z}, z, z - e, PlanTensor::constant(d, 1.0));
  CHECK(moved.second == doctest::Approx(std::sqrt(1.0) * norm2(e)));
}

TEST_CASE("rho adaptation branches") {
  auto rho = scalarish(1.0);
  CHECK(adapt_rho(rho, 1.0, 0.05)[0] == doctest::Approx(2.0));
  CHECK(adapt_rho(rho, 0.05, 1.0)[0] == doctest::Approx(0.5));
  CHECK(adapt_rho(rho, 0.3, 0.3)[0] == doctest::Approx(1.0));
  CHECK((adapt_rho(rho, 0.0, 0.0).values() > 0.0).all());
}

TEST_CASE("two trivially satisfied agents agree at zero immediately") {
  Dims dims(2, 2, 3);
  CounterpartyParams idle;
  idle.safety_stock = {0.0};
  idle.demand.assign(static_cast<size_t>(dims.size()), 0.0);
  auto a = make_counterparty(idle, dims);
  auto b = make_counterparty(idle, dims);

  auto config = CoordinationConfig::defaults(dims, CoordinationMode::verification);
  auto traj = coord_run({a.get(), b.get()}, config);
  CHECK(traj.reason == TerminationReason::converged);
  CHECK(traj.records.size() == 1);
  CHECK(norm2(traj.final_record().z) < 1e-5);
}

TEST_CASE("recorded iterations satisfy the update identities") {
  Dims dims(2, 2, 3);
  IrAgent vendor("vendor", mini_transport_ir());
  CounterpartyParams p;
  p.demand.assign(static_cast<size_t>(dims.size()), 8.0);
  auto cp = make_counterparty(p, dims);

  auto config = CoordinationConfig::defaults(dims, CoordinationMode::verification);
  config.max_iter = 40;
  auto traj = coord_run({&vendor, cp.get()}, config);
  REQUIRE(traj.records.size() >= 2);

  PlanTensor z_prev = config.z0;
  std::vector<PlanTensor> lambda_prev(2, config.lambda0);
  for (const auto& rec : traj.records) {
    auto z = z_update(rec.proposals);
    CHECK(norm2(z - rec.z) <= 1e-12);
    for (size_t m = 0; m < rec.proposals.size(); ++m) {
      auto lam = lambda_update(lambda_prev[m], rec.rho, rec.z, rec.proposals[m]);
      CHECK(norm2(lam - rec.lambda[m]) <= 1e-12);
    }
    auto [r, s] = residuals(rec.proposals, rec.z, z_prev, rec.rho);
    CHECK(rec.r == doctest::Approx(r).epsilon(1e-12));
    CHECK(rec.s == doctest::Approx(s).epsilon(1e-12));
    CHECK(rec.r >= 0.0);
    CHECK(rec.s >= 0.0);
    z_prev = rec.z;
    lambda_prev = rec.lambda;
  }
}

TEST_CASE("agent failure at the first iteration leaves an empty record set") {
  Dims dims(2, 2, 3);
  BrokenAgent broken;
  CounterpartyParams p;
  p.demand.assign(static_cast<size_t>(dims.size()), 1.0);
  auto cp = make_counterparty(p, dims);

  auto config = CoordinationConfig::defaults(dims, CoordinationMode::verification);
  auto traj = coord_run({&broken, cp.get()}, config);
  CHECK(traj.reason == TerminationReason::agent_failure);
  CHECK(traj.records.empty());
  REQUIRE(traj.failure.has_value());
  CHECK(traj.failure->k == 1);
  CHECK(traj.failure->agent_index == 0);
}

TEST_CASE("iteration cap is recorded") {
  Dims dims(2, 2, 3);
  IrAgent vendor("vendor", mini_transport_ir());
  CounterpartyParams p;
  p.demand.assign(static_cast<size_t>(dims.size()), 8.0);
  auto cp = make_counterparty(p, dims);
  auto config = CoordinationConfig::defaults(dims, CoordinationMode::verification);
  config.max_iter = 3;
  auto traj = coord_run({&vendor, cp.get()}, config);
  CHECK(traj.reason == TerminationReason::iteration_cap);
  CHECK(traj.records.size() == 3);
}

TEST_CASE("trajectory jsonl round trip is bit exact") {
  Dims dims(2, 2, 3);
  IrAgent vendor("vendor", mini_transport_ir());
  CounterpartyParams p;
  p.demand.assign(static_cast<size_t>(dims.size()), 8.0);
  auto cp = make_counterparty(p, dims);
  auto config = CoordinationConfig::defaults(dims, CoordinationMode::verification);
  config.max_iter = 10;
  auto traj = coord_run({&vendor, cp.get()}, config);

  std::string text = trajectory_to_jsonl(traj);
  auto back = trajectory_from_jsonl(text);
  CHECK(trajectory_to_jsonl(back) == text);
  CHECK(back.records.size() == traj.records.size());
  CHECK(back.reason == traj.reason);
}

TEST_CASE("identical runs produce identical trajectory bytes") {
  Dims dims(2, 2, 3);
  CounterpartyParams p;
  p.demand.assign(static_cast<size_t>(dims.size()), 8.0);
  auto config = CoordinationConfig::defaults(dims, CoordinationMode::verification);
  config.max_iter = 25;

  IrAgent v1("vendor", mini_transport_ir());
  auto c1 = make_counterparty(p, dims);
  auto t1 = trajectory_to_jsonl(coord_run({&v1, c1.get()}, config));

  IrAgent v2("vendor", mini_transport_ir());
  auto c2 = make_counterparty(p, dims);
  auto t2 = trajectory_to_jsonl(coord_run({&v2, c2.get()}, config));

  CHECK(t1 == t2);
}
