#include "optiloop/diagnosis.hpp"

#include "optiloop/metrics.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <thread>

using namespace optiloop;

namespace {

EvidenceReport report_with(std::initializer_list<std::pair<int, Severity>> fires,
                           std::map<int, double> localization = {}) {
  auto s = example1();
  IrAgent vendor("vendor", s.reference);
  auto cp = make_counterparty(s.counterparty, s.dims);
  auto traj = coord_run({&vendor, cp.get()},
                        CoordinationConfig::defaults(s.dims, CoordinationMode::verification));
  EvidenceReport rep = extract_evidence(traj, s.reference, s, 1);
  for (auto [id, sev] : fires) {
    for (auto& o : rep.outcomes) {
      if (o.id == id) {
        o.fired = true;
        o.severity = sev;
        o.detail = "synthetic";
        auto it = localization.find(id);
        double count = it == localization.end() ? 1.0 : it->second;
        o.metrics[id == 6 ? "flagged_terms" : "missing_fields"] = count;
      }
    }
  }
  rep.has_fail = false;
  for (const auto& o : rep.outcomes) {
    if (o.fired && o.severity == Severity::hard) rep.has_fail = true;
  }
  return rep;
}

}  // namespace

TEST_CASE("rule table maps evidence to actions") {
  CHECK(diagnose(report_with({})).kind == ActionKind::accept);
  CHECK(diagnose(report_with({{11, Severity::hard}})).kind == ActionKind::codefix);
  CHECK(diagnose(report_with({{6, Severity::hard}})).kind == ActionKind::codefix);
  CHECK(diagnose(report_with({{1, Severity::hard}})).kind == ActionKind::reformulate);
  CHECK(diagnose(report_with({{8, Severity::soft}})).kind == ActionKind::reformulate);
  CHECK(diagnose(report_with({{4, Severity::warning}})).kind == ActionKind::reformulate);
  // two findings on one static check are no longer a localized patch
  CHECK(diagnose(report_with({{11, Severity::hard}}, {{11, 2.0}})).kind ==
        ActionKind::reformulate);
  // hard static plus hard behavioral escalates
  CHECK(diagnose(report_with({{11, Severity::hard}, {1, Severity::hard}})).kind ==
        ActionKind::reformulate);
}

TEST_CASE("post-rules veto Accept under hard-fail evidence") {
  auto always_accept = [](const EvidenceReport&) { return ActionKind::accept; };
  auto bad = report_with({{1, Severity::hard}});
  auto action = diagnose(bad, always_accept);
  CHECK(action.kind == ActionKind::reformulate);

  auto clean = report_with({});
  CHECK(diagnose(clean, always_accept).kind == ActionKind::accept);
}

TEST_CASE("apply_codefix escape hatch and rejection paths") {
  auto s = example1();
  PipelineOptions opt;
  opt.seed = 5;

  SUBCASE("identity patch on a clean model is accepted as the escape hatch") {
    auto out = apply_codefix(s.reference, IrPatch{}, s, opt);
    CHECK(out.behaviorally_identical);
    CHECK(out.accepted_via_escape);
  }

  SUBCASE("a real fix changes behavior and takes the normal path") {
    auto faulted = inject(s.reference, {FaultKind::missing_cost, "", 5}, s);
    auto out = apply_codefix(faulted.ir, faulted.ground_truth_repair, s, opt);
    CHECK_FALSE(out.behaviorally_identical);
    CHECK_FALSE(out.reverify.has_fail);
    CHECK(structurally_equal(out.ir, s.reference));
  }

  SUBCASE("patches beyond two edits are rejected") {
    IrPatch big;
    for (int k = 0; k < 3; ++k) {
      PatchEdit e;
      e.op = PatchEdit::Op::set_variable_bounds;
      e.target = "po";
      e.upper = 100.0 + k;
      big.edits.push_back(e);
    }
    CHECK_THROWS_AS(apply_codefix(s.reference, big, s, opt), PatchRejected);
  }

  SUBCASE("patches touching unknown elements are rejected") {
    IrPatch bad;
    PatchEdit e;
    e.op = PatchEdit::Op::remove_objective_term;
    e.target = "ghost";
    bad.edits.push_back(e);
    CHECK_THROWS_AS(apply_codefix(s.reference, bad, s, opt), PatchRejected);
  }
}

TEST_CASE("pipeline accepts a correct candidate without repairs") {
  auto s = example1();
  NoopOracle oracle;
  PipelineOptions opt;
  auto res = run_pipeline(s, Candidate{s.reference}, oracle, opt);
  CHECK(res.accepted);
  CHECK(res.repair_count == 0);
  CHECK(res.verification_episodes == 1);
  REQUIRE_FALSE(res.attempts.empty());
  CHECK_FALSE(res.attempts.back().evidence.has_fail);
}

TEST_CASE("ground-truth repair closes a sign flip in one reformulation") {
  auto s = example1();
  auto faulted = inject(s.reference, {FaultKind::sign_flip, "", 3}, s);
  GroundTruthOracle oracle(s.reference, faulted.ground_truth_repair);
  PipelineOptions opt;
  auto res = run_pipeline(s, Candidate{faulted.ir}, oracle, opt);
  CHECK(res.accepted);
  CHECK(res.repair_count == 1);
  CHECK(structurally_equal(res.final_ir, s.reference));
  REQUIRE(res.action_history.size() >= 2);
  CHECK(res.action_history.front() == "Reformulate");
  CHECK(res.action_history.back() == "Accept");
}

TEST_CASE("ground-truth repair closes a missing cost through a patch") {
  auto s = example2();
  auto faulted = inject(s.reference, {FaultKind::missing_cost, "", 3}, s);
  GroundTruthOracle oracle(s.reference, faulted.ground_truth_repair);
  PipelineOptions opt;
  auto res = run_pipeline(s, Candidate{faulted.ir}, oracle, opt);
  CHECK(res.accepted);
  CHECK(res.repair_count == 1);
  CHECK(structurally_equal(res.final_ir, s.reference));
  CHECK(res.action_history.front() == "CodeFix");
}

TEST_CASE("noop oracle drains the budget and never accepts a hard failure") {
  auto s = example1();
  auto faulted = inject(s.reference, {FaultKind::sign_flip, "", 3}, s);
  NoopOracle oracle;
  PipelineOptions opt;
  opt.repair_budget = 3;
  auto res = run_pipeline(s, Candidate{faulted.ir}, oracle, opt);
  CHECK_FALSE(res.accepted);
  CHECK(res.repair_count == 3);
  CHECK(res.verification_episodes <= 4);  // R + 1
  for (const auto& a : res.attempts) {
    if (a.action == "Accept") CHECK_FALSE(a.evidence.has_fail);
  }
}

TEST_CASE("interface faults die at local validation and regenerate") {
  auto s = example1();
  auto faulted = inject(s.reference, {FaultKind::interface_mismatch, "", 2}, s);

  SUBCASE("ground truth replaces the broken wrapper") {
    GroundTruthOracle oracle(s.reference, {});
    PipelineOptions opt;
    auto res = run_pipeline(s, Candidate{faulted.ir, faulted.iface}, oracle, opt);
    CHECK(res.accepted);
    REQUIRE_FALSE(res.attempts.empty());
    CHECK_FALSE(res.attempts.front().local_ok);
  }

  SUBCASE("noop keeps failing locally until the budget runs out") {
    NoopOracle oracle;
    PipelineOptions opt;
    opt.repair_budget = 2;
    auto res = run_pipeline(s, Candidate{faulted.ir, faulted.iface}, oracle, opt);
    CHECK_FALSE(res.accepted);
    CHECK(res.repair_count == 2);
    CHECK(res.verification_episodes == 0);
    for (const auto& a : res.attempts) CHECK_FALSE(a.local_ok);
  }
}

TEST_CASE("both interface fault flavors are caught locally") {
  auto s = example1();
  for (auto kind : {InterfaceFaultKind::wrong_dims, InterfaceFaultKind::missing_decomp}) {
    NoopOracle oracle;
    PipelineOptions opt;
    opt.repair_budget = 1;
    auto res = run_pipeline(s, Candidate{s.reference, kind}, oracle, opt);
    CHECK_FALSE(res.accepted);
    REQUIRE_FALSE(res.attempts.empty());
    CHECK_FALSE(res.attempts.front().local_ok);
  }
}

TEST_CASE("exec oracle round-trips the wire format") {
  auto s = example1();
  auto faulted = inject(s.reference, {FaultKind::sign_flip, "", 3}, s);

  // echoes the candidate back; exercises the subprocess transport
  ExternalOracle echo(
      "exec:python3 -c \"import sys,json; req=json.load(sys.stdin); "
      "print(json.dumps({'ir': req['current_ir']}))\"");
  RepairRequest req;
  req.kind = RepairRequestKind::reformulate;
  req.scenario = &s;
  req.current = faulted.ir;
  auto resp = echo.repair(req);
  REQUIRE(resp.ok);
  REQUIRE(resp.ir.has_value());
  CHECK(structurally_equal(*resp.ir, faulted.ir));

  ExternalOracle garbage("exec:echo not-json");
  auto bad = garbage.repair(req);
  CHECK_FALSE(bad.ok);

  setenv("OPTILOOP_ORACLE_TIMEOUT_SECS", "1", 1);
  ExternalOracle slow("exec:sleep 5");
  auto timed_out = slow.repair(req);
  CHECK_FALSE(timed_out.ok);
  unsetenv("OPTILOOP_ORACLE_TIMEOUT_SECS");
}

TEST_CASE("http oracle repairs through a live endpoint") {
  auto s = example1();
  auto faulted = inject(s.reference, {FaultKind::sign_flip, "", 3}, s);
  nlohmann::json reference_json = ir_to_json(s.reference);

  httplib::Server server;
  std::atomic<int> hits{0};
  server.Post("/repair", [&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    auto body = nlohmann::json::parse(req.body);
    CHECK(body.contains("evidence"));
    CHECK(body.contains("current_ir"));
    res.set_content(nlohmann::json{{"ir", reference_json}}.dump(), "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread runner([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ExternalOracle oracle("http://127.0.0.1:" + std::to_string(port) + "/repair");
  PipelineOptions opt;
  auto res = run_pipeline(s, Candidate{faulted.ir}, oracle, opt);

  server.stop();
  runner.join();

  CHECK(hits.load() >= 1);
  CHECK(res.accepted);
  CHECK(structurally_equal(res.final_ir, s.reference));
}

TEST_CASE("malformed oracle output consumes the attempt without corrupting state") {
  auto s = example1();
  auto faulted = inject(s.reference, {FaultKind::sign_flip, "", 3}, s);
  ExternalOracle garbage("exec:echo '{\"nonsense\":1}'");
  PipelineOptions opt;
  opt.repair_budget = 2;
  auto res = run_pipeline(s, Candidate{faulted.ir}, garbage, opt);
  CHECK_FALSE(res.accepted);
  CHECK(res.repair_count == 2);
  CHECK(structurally_equal(res.final_ir, faulted.ir));  // best seen is the input
}
