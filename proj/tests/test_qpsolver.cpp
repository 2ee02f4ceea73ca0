#include "optiloop/qpsolver.hpp"

#include "support/active_set_oracle.hpp"
#include "support/test_ir.hpp"

#include <doctest.h>

#include <random>

using namespace optiloop;
using optiloop::testing::active_set_solve;
using optiloop::testing::mini_transport_ir;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CompiledQP box_qp(long n) {
  CompiledQP qp;
  qp.n = n;
  qp.Q = Eigen::MatrixXd::Zero(n, n);
  qp.q = Eigen::VectorXd::Zero(n);
  qp.A.resize(0, n);
  qp.rhs.resize(0);
  qp.lb = Eigen::VectorXd::Constant(n, -kInf);
  qp.ub = Eigen::VectorXd::Constant(n, kInf);
  return qp;
}

/// Random strictly convex QP with a feasible point by construction.
CompiledQP random_qp(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nd(1, 6), md(0, 3), reld(0, 2);
  std::uniform_real_distribution<double> u(-2.0, 2.0), up(0.5, 3.0);
  long n = nd(rng);
  long m = md(rng);

  CompiledQP qp = box_qp(n);
  Eigen::MatrixXd G(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) G(i, j) = u(rng);
  qp.Q = G.transpose() * G + 0.1 * Eigen::MatrixXd::Identity(n, n);
  for (long i = 0; i < n; ++i) qp.q[i] = u(rng);

  Eigen::VectorXd x0(n);
  for (long i = 0; i < n; ++i) x0[i] = u(rng);

  for (long i = 0; i < n; ++i) {
    int kind = reld(rng);
    if (kind == 0) {
      qp.lb[i] = x0[i] - up(rng);
      qp.ub[i] = x0[i] + up(rng);
    } else if (kind == 1) {
      qp.lb[i] = x0[i] - up(rng);
    } else {
      qp.ub[i] = x0[i] + up(rng);
    }
  }

  qp.A.resize(m, n);
  qp.rhs.resize(m);
  for (long i = 0; i < m; ++i) {
    for (long j = 0; j < n; ++j) qp.A(i, j) = u(rng);
    double v = qp.A.row(i).dot(x0);
    int kind = reld(rng);
    if (kind == 0) {
      qp.relations.push_back(Relation::le);
      qp.rhs[i] = v + up(rng);
    } else if (kind == 1) {
      qp.relations.push_back(Relation::ge);
      qp.rhs[i] = v - up(rng);
    } else {
      qp.relations.push_back(Relation::eq);
      qp.rhs[i] = v;
    }
  }
  return qp;
}

}  // namespace

TEST_CASE("bound projection: min (x-3)^2 on [0, 2]") {
  CompiledQP qp = box_qp(1);
  qp.Q(0, 0) = 2.0;
  qp.q[0] = -6.0;
  qp.constant = 9.0;
  qp.lb[0] = 0.0;
  qp.ub[0] = 2.0;
  auto sol = solve_qp(qp);
  REQUIRE(sol.status == QPStatus::optimal);
  CHECK(sol.primal[0] == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("symmetric equality: min x^2+y^2 st x+y=2") {
  CompiledQP qp = box_qp(2);
  qp.Q = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  qp.A.resize(1, 2);
  qp.A << 1, 1;
  qp.rhs.resize(1);
  qp.rhs << 2;
  qp.relations = {Relation::eq};
  auto sol = solve_qp(qp);
  REQUIRE(sol.status == QPStatus::optimal);
  CHECK(sol.primal[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(sol.primal[1] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(sol.objective == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("random PSD QPs match the active-set enumeration oracle") {
  std::mt19937_64 rng(20240811);
  int solved = 0;
  for (int rep = 0; rep < 60; ++rep) {
    CompiledQP qp = random_qp(rng);
    auto oracle = active_set_solve(qp);
    REQUIRE(oracle.found);
    auto sol = solve_qp(qp, 1e-8, 50000);
    REQUIRE(sol.status == QPStatus::optimal);
    double err = std::abs(sol.objective - oracle.objective);
    double rel = err / std::max(1e-6, std::abs(oracle.objective));
    CHECK((err <= 1e-5 || rel <= 1e-6));
    ++solved;
  }
  CHECK(solved >= 50);
}

TEST_CASE("per-solve optimality: KKT residual within tolerance") {
  std::mt19937_64 rng(99);
  for (int rep = 0; rep < 20; ++rep) {
    CompiledQP qp = random_qp(rng);
    auto sol = solve_qp(qp, 1e-8, 50000);
    REQUIRE(sol.status == QPStatus::optimal);
    CHECK(sol.kkt_residual <= 1e-8);
  }
}

TEST_CASE("determinism: identical inputs, identical solutions") {
  std::mt19937_64 rng(5);
  CompiledQP qp = random_qp(rng);
  auto a = solve_qp(qp, 1e-8, 50000);
  auto b = solve_qp(qp, 1e-8, 50000);
  REQUIRE(a.status == b.status);
  CHECK(a.objective == b.objective);
  CHECK((a.primal.array() == b.primal.array()).all());
}

TEST_CASE("infeasible box is reported infeasible") {
  CompiledQP qp = box_qp(1);
  qp.Q(0, 0) = 2.0;
  qp.lb[0] = 0.0;
  qp.ub[0] = 1.0;
  qp.A.resize(1, 1);
  qp.A << 1;
  qp.rhs.resize(1);
  qp.rhs << 5.0;
  qp.relations = {Relation::ge};
  auto sol = solve_qp(qp, 1e-8, 50000);
  CHECK(sol.status == QPStatus::infeasible);
}

TEST_CASE("subproblem compilation expands the prox and price terms") {
  auto ir = mini_transport_ir();
  Dims dims(2, 2, 3);

  SUBCASE("zero z, unit rho: public squares gain one half each") {
    auto qp = compile_subproblem(ir, PlanTensor::zeros(dims),
                                 PlanTensor::zeros(dims), PlanTensor::constant(dims, 1.0));
    const auto& pub = qp.public_slice();
    for (long k = 0; k < pub.count; ++k) {
      CHECK(qp.Q(pub.offset + k, pub.offset + k) == doctest::Approx(1.0));
    }
    CHECK(qp.constant == doctest::Approx(0.0));
  }

  SUBCASE("constant lambda subtracts from each public linear cost") {
    double c = 0.7;
    auto base = compile_base(ir);
    auto qp = compile_subproblem(ir, PlanTensor::zeros(dims),
                                 PlanTensor::constant(dims, c),
                                 PlanTensor::constant(dims, 1.0));
    const auto& pub = qp.public_slice();
    for (long k = 0; k < pub.count; ++k) {
      CHECK(qp.q[pub.offset + k] ==
            doctest::Approx(base.q[pub.offset + k] - c));
    }
  }

  SUBCASE("prox constant tracks 0.5 rho z^2") {
    auto z = PlanTensor::constant(dims, 2.0);
    auto qp = compile_subproblem(ir, z, PlanTensor::zeros(dims),
                                 PlanTensor::constant(dims, 3.0));
    CHECK(qp.constant == doctest::Approx(0.5 * 3.0 * 4.0 * dims.size()));
  }

  SUBCASE("rho must be positive") {
    CHECK_THROWS_AS(compile_subproblem(ir, PlanTensor::zeros(dims),
                                       PlanTensor::zeros(dims), PlanTensor::zeros(dims)),
                    std::invalid_argument);
  }
}

TEST_CASE("eval_private on the transport model") {
  auto ir = mini_transport_ir();
  Dims dims(2, 2, 3);

  auto zero = eval_private(ir, PlanTensor::zeros(dims));
  REQUIRE(zero.feasible());
  CHECK(zero.value == doctest::Approx(0.0).epsilon(1e-9));

  // 10 units of item 0 to node 0 each of the 3 weeks at $2/unit
  PlanTensor plan(dims);
  for (int t = 0; t < 3; ++t) plan.at(0, 0, t) = 10.0;
  auto v = eval_private(ir, plan);
  REQUIRE(v.feasible());
  CHECK(v.value == doctest::Approx(60.0).epsilon(1e-7));

  // exceeding the 150 per item-week outbound cap is infeasible
  PlanTensor over(dims);
  over.at(0, 0, 0) = 100.0;
  over.at(0, 1, 0) = 100.0;
  auto inf = eval_private(ir, over);
  CHECK_FALSE(inf.feasible());
}

TEST_CASE("eval_private is monotone under added constraints") {
  auto ir = mini_transport_ir();
  Dims dims(2, 2, 3);
  PlanTensor plan(dims);
  for (int t = 0; t < 3; ++t) plan.at(0, 0, t) = 20.0;

  auto loose = eval_private(ir, plan);

  auto tighter = ir;
  LinearConstraint floor_ship;  // force >= 5 on every lane, raising cost
  floor_ship.name = "min_lane";
  floor_ship.quantifiers = {{"i", "item"}, {"w", "warehouse"}, {"j", "node"}, {"t", "period"}};
  floor_ship.lhs = {{CoefExpr::lit(1.0),
                     {"ship",
                      {IndexRef::sym("i"), IndexRef::sym("w"), IndexRef::sym("j"),
                       IndexRef::sym("t")}}}};
  floor_ship.relation = Relation::ge;
  floor_ship.rhs = AffineExpr::lit(0.0);
  tighter.constraints.push_back(floor_ship);

  auto still = eval_private(tighter, plan);
  REQUIRE(loose.feasible());
  REQUIRE(still.feasible());
  CHECK(still.value >= loose.value - 1e-7);
}
