#include "optiloop/diagnosis.hpp"

#include <nlohmann/json.hpp>

#include <httplib.h>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <cstring>

namespace optiloop {

using json = nlohmann::json;

// --- ground truth ------------------------------------------------------------------

GroundTruthOracle::GroundTruthOracle(FormulationIR reference, IrPatch inverse_edit)
    : reference_(std::move(reference)), inverse_(std::move(inverse_edit)) {}

RepairResponse GroundTruthOracle::repair(const RepairRequest& req) {
  ++calls_;
  RepairResponse resp;
  resp.ok = true;
  if (req.kind == RepairRequestKind::codefix && !inverse_.empty() &&
      inverse_.edits.size() <= 2) {
    resp.patch = inverse_;
    resp.note = "inverse edit from fault metadata";
    return resp;
  }
  resp.ir = reference_;
  resp.note = "reference formulation from fault metadata";
  return resp;
}

RepairResponse NoopOracle::repair(const RepairRequest& req) {
  ++calls_;
  RepairResponse resp;
  resp.ok = true;
  resp.echo_input = true;
  if (req.kind == RepairRequestKind::codefix) {
    resp.patch = IrPatch{};  // identity patch
    resp.note = "noop identity patch";
  } else {
    resp.ir = req.current;
    resp.note = "noop keeps the candidate unchanged";
  }
  return resp;
}

// --- external ----------------------------------------------------------------------

namespace {

json request_to_json(const RepairRequest& req) {
  json j;
  switch (req.kind) {
    case RepairRequestKind::codefix: j["action"] = "CodeFix"; break;
    case RepairRequestKind::reformulate: j["action"] = "Reformulate"; break;
    case RepairRequestKind::regenerate: j["action"] = "Regenerate"; break;
  }
  j["attempt"] = req.attempt;
  if (req.scenario) {
    json fields = json::array();
    for (const auto& f : req.scenario->fields) {
      fields.push_back(json{{"name", f.name},
                            {"shape", f.shape},
                            {"role", field_role_name(f.role)},
                            {"data", f.data}});
    }
    j["scenario"] = json{{"name", req.scenario->name},
                         {"nl_text", req.scenario->nl_text},
                         {"fields", fields}};
  }
  j["current_ir"] = ir_to_json(req.current);
  j["evidence"] = evidence_to_json(req.evidence);
  return j;
}

RepairResponse parse_oracle_reply(const std::string& body) {
  RepairResponse resp;
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    resp.note = std::string("unparseable oracle reply: ") + e.what();
    return resp;
  }
  try {
    if (j.contains("patch")) {
      resp.patch = patch_from_json(j.at("patch"));
      resp.ok = true;
    } else if (j.contains("ir")) {
      resp.ir = ir_from_json(j.at("ir"));
      resp.ok = true;
    } else {
      resp.note = "oracle reply carries neither 'patch' nor 'ir'";
    }
  } catch (const std::exception& e) {
    resp.ok = false;
    resp.patch.reset();
    resp.ir.reset();
    resp.note = std::string("malformed oracle reply: ") + e.what();
  }
  return resp;
}

/// Runs `sh -c cmd`, writes `input` to its stdin, reads stdout to EOF with a
/// hard deadline. Returns false on timeout or spawn failure.
bool run_subprocess(const std::string& cmd, const std::string& input,
                    int timeout_secs, std::string* output, std::string* error) {
  int in_pipe[2], out_pipe[2];
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0) {
    *error = "pipe() failed";
    return false;
  }
  pid_t pid = fork();
  if (pid < 0) {
    *error = "fork() failed";
    return false;
  }
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);

  signal(SIGPIPE, SIG_IGN);
  size_t written = 0;
  while (written < input.size()) {
    ssize_t n = write(in_pipe[1], input.data() + written, input.size() - written);
    if (n <= 0) break;
    written += static_cast<size_t>(n);
  }
  close(in_pipe[1]);

  auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(timeout_secs);
  std::string out;
  char buf[4096];
  bool timed_out = false;
  while (true) {
    auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
                         deadline - std::chrono::steady_clock::now())
                         .count();
    if (remaining <= 0) {
      timed_out = true;
      break;
    }
    struct pollfd pfd{out_pipe[0], POLLIN, 0};
    int pr = poll(&pfd, 1, static_cast<int>(std::min<long long>(remaining, 1000)));
    if (pr < 0) break;
    if (pr == 0) continue;
    ssize_t n = read(out_pipe[0], buf, sizeof(buf));
    if (n < 0) break;
    if (n == 0) break;  // EOF
    out.append(buf, static_cast<size_t>(n));
  }
  close(out_pipe[0]);
  if (timed_out) {
    kill(pid, SIGKILL);
    waitpid(pid, nullptr, 0);
    *error = "oracle subprocess timed out";
    return false;
  }
  int status = 0;
  waitpid(pid, &status, 0);
  *output = std::move(out);
  return true;
}

}  // namespace

ExternalOracle::ExternalOracle(std::string transport) : transport_(std::move(transport)) {}

int ExternalOracle::timeout_secs() {
  const char* env = std::getenv("OPTILOOP_ORACLE_TIMEOUT_SECS");
  if (!env) return 120;
  int v = std::atoi(env);
  return v > 0 ? v : 120;
}

RepairResponse ExternalOracle::repair(const RepairRequest& req) {
  ++calls_;
  const std::string payload = request_to_json(req).dump();
  RepairResponse failed;
  failed.ok = false;

  if (transport_.rfind("exec:", 0) == 0) {
    std::string cmd = transport_.substr(5);
    std::string out, err;
    if (!run_subprocess(cmd, payload, timeout_secs(), &out, &err)) {
      failed.note = err;
      return failed;
    }
    return parse_oracle_reply(out);
  }

  if (transport_.rfind("http://", 0) == 0) {
    std::string rest = transport_.substr(7);
    auto slash = rest.find('/');
    std::string hostport = slash == std::string::npos ? rest : rest.substr(0, slash);
    std::string path = slash == std::string::npos ? "/" : rest.substr(slash);
    std::string host = hostport;
    int port = 80;
    auto colon = hostport.rfind(':');
    if (colon != std::string::npos) {
      host = hostport.substr(0, colon);
      port = std::atoi(hostport.c_str() + colon + 1);
    }
    httplib::Client client(host, port);
    client.set_read_timeout(timeout_secs(), 0);
    client.set_write_timeout(timeout_secs(), 0);
    auto res = client.Post(path.c_str(), payload, "application/json");
    if (!res || res->status != 200) {
      failed.note = "oracle http call failed";
      return failed;
    }
    return parse_oracle_reply(res->body);
  }

  failed.note = "unknown oracle transport '" + transport_ + "'";
  return failed;
}

std::unique_ptr<RepairOracle> make_oracle(const std::string& spec,
                                          const FaultedCandidate* metadata,
                                          const ScenarioSpec& scenario) {
  if (spec == "ground-truth" || spec == "ground_truth") {
    IrPatch inverse;
    if (metadata) inverse = metadata->ground_truth_repair;
    return std::make_unique<GroundTruthOracle>(scenario.reference, inverse);
  }
  if (spec == "noop") return std::make_unique<NoopOracle>();
  if (spec.rfind("exec:", 0) == 0 || spec.rfind("http://", 0) == 0 ||
      spec.rfind("http:", 0) == 0) {
    std::string transport = spec;
    if (spec.rfind("http:", 0) == 0 && spec.rfind("http://", 0) != 0) {
      transport = "http://" + spec.substr(5);
    }
    return std::make_unique<ExternalOracle>(transport);
  }
  throw std::invalid_argument("unknown oracle '" + spec + "'");
}

}  // namespace optiloop
