#include "optiloop/diagnosis.hpp"

namespace optiloop {

std::string action_name(ActionKind a) {
  switch (a) {
    case ActionKind::accept: return "Accept";
    case ActionKind::codefix: return "CodeFix";
    case ActionKind::reformulate: return "Reformulate";
  }
  return "?";
}

ActionKind rule_table_policy(const EvidenceReport& report) {
  int hard = 0, soft_or_warning = 0;
  bool localized_static = false;
  int other_hard = 0;
  for (const auto& o : report.outcomes) {
    if (!o.fired) continue;
    if (o.severity == Severity::hard) {
      ++hard;
      bool is_static_pattern = o.id == 6 || o.id == 11;
      double flagged = 0.0;
      auto it = o.metrics.find(o.id == 6 ? "flagged_terms" : "missing_fields");
      if (it != o.metrics.end()) flagged = it->second;
      if (is_static_pattern && flagged == 1.0) {
        localized_static = true;
      } else {
        ++other_hard;
      }
    } else if (o.severity == Severity::soft || o.severity == Severity::warning) {
      ++soft_or_warning;
    }
  }
  if (hard > 0) {
    if (localized_static && other_hard == 0 && hard == 1) return ActionKind::codefix;
    return ActionKind::reformulate;
  }
  if (soft_or_warning > 0) return ActionKind::reformulate;
  return ActionKind::accept;
}

DiagnosisAction diagnose(const EvidenceReport& report, const RawPolicy& policy) {
  ActionKind raw = policy(report);
  DiagnosisAction out;
  if (raw == ActionKind::accept && report.has_fail) {
    out.kind = ActionKind::reformulate;
    out.rationale = "policy accepted but hard-fail evidence is present; escalated";
    return out;
  }
  out.kind = raw;
  switch (raw) {
    case ActionKind::accept:
      out.rationale = "no unexplained evidence; accept as-is";
      break;
    case ActionKind::codefix:
      out.rationale = "single localized static finding; minimal patch requested";
      break;
    case ActionKind::reformulate:
      out.rationale = "evidence indicates a structural modeling error";
      break;
  }
  return out;
}

}  // namespace optiloop
