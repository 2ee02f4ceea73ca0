#pragma once

#include "optiloop/coordinator.hpp"
#include "optiloop/evidence.hpp"
#include "optiloop/faults.hpp"
#include "optiloop/patch.hpp"
#include "optiloop/scenarios.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace optiloop {

enum class ActionKind { accept, codefix, reformulate };

std::string action_name(ActionKind a);

struct DiagnosisAction {
  ActionKind kind = ActionKind::accept;
  std::string rationale;
};

using RawPolicy = std::function<ActionKind(const EvidenceReport&)>;

/// Built-in rule table: localized hard static evidence (one flagged term on
/// check 6 or 11, nothing else hard) asks for a minimal patch; any other
/// hard or soft fire escalates to reformulation; a quiet report is accepted.
ActionKind rule_table_policy(const EvidenceReport& report);

/// Runs the raw policy, then the deterministic post-rules: Accept is never
/// allowed to stand while hard-fail evidence is present.
DiagnosisAction diagnose(const EvidenceReport& report,
                         const RawPolicy& policy = rule_table_policy);

// --- repair oracles ----------------------------------------------------------------

enum class RepairRequestKind { codefix, reformulate, regenerate };

struct RepairRequest {
  RepairRequestKind kind = RepairRequestKind::reformulate;
  const ScenarioSpec* scenario = nullptr;
  FormulationIR current;
  EvidenceReport evidence;
  int attempt = 0;
};

struct RepairResponse {
  bool ok = false;
  std::optional<IrPatch> patch;      // codefix answers
  std::optional<FormulationIR> ir;   // reformulation / regeneration answers
  bool echo_input = false;           // oracle returned the candidate untouched
  std::string note;
};

class RepairOracle {
 public:
  virtual ~RepairOracle() = default;
  virtual std::string kind() const = 0;
  virtual RepairResponse repair(const RepairRequest& req) = 0;
  int calls() const { return calls_; }

 protected:
  int calls_ = 0;
};

/// Answers from the injected-fault metadata: the inverse edit for patches,
/// the reference formulation for reformulations.
class GroundTruthOracle : public RepairOracle {
 public:
  GroundTruthOracle(FormulationIR reference, IrPatch inverse_edit);
  std::string kind() const override { return "ground-truth"; }
  RepairResponse repair(const RepairRequest& req) override;

 private:
  FormulationIR reference_;
  IrPatch inverse_;
};

class NoopOracle : public RepairOracle {
 public:
  std::string kind() const override { return "noop"; }
  RepairResponse repair(const RepairRequest& req) override;
};

/// Bridges to a real repair seat: `exec:<cmd>` spawns a subprocess with the
/// request JSON on stdin and an IR or patch JSON expected on stdout;
/// `http:<url>` POSTs the same payload. Timeouts and malformed answers are
/// failed attempts, never crashes.
class ExternalOracle : public RepairOracle {
 public:
  explicit ExternalOracle(std::string transport);
  std::string kind() const override { return "external"; }
  RepairResponse repair(const RepairRequest& req) override;

  static int timeout_secs();  // OPTILOOP_ORACLE_TIMEOUT_SECS, default 120

 private:
  std::string transport_;  // exec:... or http://...
};

std::unique_ptr<RepairOracle> make_oracle(const std::string& spec,
                                          const FaultedCandidate* metadata,
                                          const ScenarioSpec& scenario);

// --- pipeline ----------------------------------------------------------------------

struct Candidate {
  FormulationIR ir;
  InterfaceFaultKind iface = InterfaceFaultKind::none;
};

struct AttemptRecord {
  int attempt = 0;
  bool local_ok = false;
  std::string local_error;
  std::string action;
  EvidenceReport evidence;
  std::string note;
};

struct PipelineResult {
  FormulationIR final_ir;
  bool accepted = false;
  int repair_count = 0;
  int verification_episodes = 0;
  std::vector<AttemptRecord> attempts;
  std::vector<std::string> action_history;
  std::optional<CoordinationTrajectory> last_trajectory;
};

struct PipelineOptions {
  int repair_budget = 3;  // R
  std::uint64_t seed = 0;
  EvidenceMode evidence_mode = EvidenceMode::full;
  long verification_cap = 300;
};

/// apply-and-reverify step of a CodeFix: applies a bounded patch (at most
/// two edits), re-runs local validation and one short verification episode.
/// When the patch does not change private values at the probe plans and the
/// re-verification shows no hard fail, the patched agent is accepted as an
/// escape hatch.
struct CodefixOutcome {
  FormulationIR ir;
  bool accepted_via_escape = false;
  bool behaviorally_identical = false;
  EvidenceReport reverify;
  CoordinationTrajectory trajectory;
};

CodefixOutcome apply_codefix(const FormulationIR& ir, const IrPatch& patch,
                             const ScenarioSpec& scenario, const PipelineOptions& opt);

PipelineResult run_pipeline(const ScenarioSpec& scenario, const Candidate& candidate,
                            RepairOracle& oracle, const PipelineOptions& opt);

}  // namespace optiloop
