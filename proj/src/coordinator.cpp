#include "optiloop/coordinator.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <sstream>

namespace optiloop {

using json = nlohmann::ordered_json;

std::string coordination_mode_name(CoordinationMode m) {
  return m == CoordinationMode::verification ? "verification" : "evaluation";
}

CoordinationMode coordination_mode_from_name(const std::string& s) {
  if (s == "verification") return CoordinationMode::verification;
  if (s == "evaluation") return CoordinationMode::evaluation;
  throw std::invalid_argument("unknown coordination mode '" + s + "'");
}

std::string termination_reason_name(TerminationReason r) {
  switch (r) {
    case TerminationReason::converged: return "converged";
    case TerminationReason::iteration_cap: return "iteration_cap";
    case TerminationReason::agent_failure: return "agent_failure";
  }
  return "?";
}

TerminationReason termination_reason_from_name(const std::string& s) {
  if (s == "converged") return TerminationReason::converged;
  if (s == "iteration_cap") return TerminationReason::iteration_cap;
  if (s == "agent_failure") return TerminationReason::agent_failure;
  throw std::invalid_argument("unknown termination reason '" + s + "'");
}

CoordinationConfig CoordinationConfig::defaults(const Dims& dims,
                                                CoordinationMode mode) {
  CoordinationConfig c;
  c.mode = mode;
  c.max_iter = mode == CoordinationMode::verification ? 300 : 2000;
  c.z0 = PlanTensor::zeros(dims);
  c.lambda0 = PlanTensor::zeros(dims);
  c.rho0 = PlanTensor::constant(dims, 1.0);
  return c;
}

PlanTensor z_update(const std::vector<PlanTensor>& proposals) {
  if (proposals.empty()) throw std::invalid_argument("z_update: no proposals");
  PlanTensor z = proposals.front();
  for (size_t m = 1; m < proposals.size(); ++m) {
    require_same_dims(z, proposals[m], "z_update");
    z.values() += proposals[m].values();
  }
  z.values() /= static_cast<double>(proposals.size());
  return z;
}

PlanTensor lambda_update(const PlanTensor& lambda, const PlanTensor& rho,
                         const PlanTensor& z_new, const PlanTensor& proposal) {
  require_same_dims(lambda, rho, "lambda_update");
  require_same_dims(lambda, z_new, "lambda_update");
  require_same_dims(lambda, proposal, "lambda_update");
  if ((rho.values() <= 0.0).any()) {
    throw std::invalid_argument("lambda_update: rho must be > 0");
  }
  return PlanTensor(lambda.dims(),
                    lambda.values() + rho.values() * (z_new.values() - proposal.values()));
}

std::pair<double, double> residuals(const std::vector<PlanTensor>& proposals,
                                    const PlanTensor& z_new, const PlanTensor& z_old,
                                    const PlanTensor& rho) {
  require_same_dims(z_new, z_old, "residuals");
  require_same_dims(z_new, rho, "residuals");
  double r2 = 0.0;
  for (const auto& x : proposals) {
    require_same_dims(x, z_new, "residuals");
    r2 += (x.values() - z_new.values()).square().sum();
  }
  double r = std::sqrt(r2);
  double s = std::sqrt(static_cast<double>(proposals.size())) *
             std::sqrt((rho.values() * (z_new.values() - z_old.values())).square().sum());
  return {r, s};
}

PlanTensor adapt_rho(const PlanTensor& rho, double r, double s) {
  if (r > 10.0 * s) return PlanTensor(rho.dims(), rho.values() * 2.0);
  if (s > 10.0 * r) return PlanTensor(rho.dims(), rho.values() * 0.5);
  return rho;
}

CoordinationTrajectory coord_run(const std::vector<const Agent*>& agents,
                                 const CoordinationConfig& config) {
  if (agents.empty()) throw std::invalid_argument("coord_run: no agents");

  CoordinationTrajectory traj;
  traj.config = config;
  traj.config.agent_names.clear();
  for (const Agent* a : agents) traj.config.agent_names.push_back(a->name());

  PlanTensor z = config.z0;
  PlanTensor rho = config.rho0;
  std::vector<PlanTensor> lambda(agents.size(), config.lambda0);

  for (long k = 1; k <= config.max_iter; ++k) {
    std::vector<PlanTensor> proposals;
    std::vector<ObjDecomp> decomps;
    proposals.reserve(agents.size());

    for (size_t m = 0; m < agents.size(); ++m) {
      AgentResponse resp;
      std::string what;
      try {
        resp = agents[m]->solve(z, lambda[m], rho);
        if (!resp.ok()) {
          what = "solve status " + qp_status_name(resp.status);
        } else if (!(resp.proposal.dims() == z.dims())) {
          what = "proposal dims mismatch";
        } else if (!resp.decomp) {
          what = "missing objective decomposition";
        }
      } catch (const std::exception& e) {
        what = e.what();
      }
      if (!what.empty()) {
        traj.reason = TerminationReason::agent_failure;
        traj.failure = AgentFailureInfo{k, static_cast<int>(m),
                                        agents[m]->name() + ": " + what};
        return traj;
      }
      proposals.push_back(std::move(resp.proposal));
      decomps.push_back(*resp.decomp);
    }

    PlanTensor z_new = z_update(proposals);
    for (size_t m = 0; m < agents.size(); ++m) {
      lambda[m] = lambda_update(lambda[m], rho, z_new, proposals[m]);
    }
    auto [r, s] = residuals(proposals, z_new, z, rho);

    IterationRecord rec;
    rec.k = k;
    rec.proposals = std::move(proposals);
    rec.decomps = std::move(decomps);
    rec.z = z_new;
    rec.lambda = lambda;
    rec.rho = rho;
    rec.r = r;
    rec.s = s;
    traj.records.push_back(std::move(rec));

    if (r < config.primal_tol && s < config.dual_tol) {
      traj.reason = TerminationReason::converged;
      return traj;
    }
    if (config.adapt) rho = adapt_rho(rho, r, s);
    z = z_new;
  }
  traj.reason = TerminationReason::iteration_cap;
  return traj;
}

// --- JSONL ---------------------------------------------------------------------

namespace {

json tensor_to_json(const PlanTensor& t) {
  json o;
  o["dims"] = {t.dims().items, t.dims().nodes, t.dims().periods};
  o["values"] = std::vector<double>(t.values().data(), t.values().data() + t.size());
  return o;
}

PlanTensor tensor_from_json(const json& o) {
  auto d = o.at("dims");
  Dims dims(d.at(0).get<int>(), d.at(1).get<int>(), d.at(2).get<int>());
  auto vals = o.at("values").get<std::vector<double>>();
  Eigen::ArrayXd a(static_cast<long>(vals.size()));
  for (size_t i = 0; i < vals.size(); ++i) a[static_cast<long>(i)] = vals[i];
  return PlanTensor(dims, a);
}

json decomp_to_json(const ObjDecomp& d) {
  return json{{"private", d.private_cost}, {"price", d.price}, {"prox", d.prox}};
}

ObjDecomp decomp_from_json(const json& o) {
  ObjDecomp d;
  d.private_cost = o.at("private").get<double>();
  d.price = o.at("price").get<double>();
  d.prox = o.at("prox").get<double>();
  return d;
}

}  // namespace

std::string trajectory_to_jsonl(const CoordinationTrajectory& traj) {
  std::ostringstream out;
  const CoordinationConfig& c = traj.config;
  json header;
  header["type"] = "config";
  header["mode"] = coordination_mode_name(c.mode);
  header["max_iter"] = c.max_iter;
  header["primal_tol"] = c.primal_tol;
  header["dual_tol"] = c.dual_tol;
  header["adapt"] = c.adapt;
  header["agents"] = c.agent_names;
  header["z0"] = tensor_to_json(c.z0);
  header["lambda0"] = tensor_to_json(c.lambda0);
  header["rho0"] = tensor_to_json(c.rho0);
  out << header.dump() << "\n";

  for (const auto& rec : traj.records) {
    json o;
    o["type"] = "iteration";
    o["k"] = rec.k;
    json props = json::array();
    for (const auto& p : rec.proposals) props.push_back(tensor_to_json(p));
    o["proposals"] = props;
    json decs = json::array();
    for (const auto& d : rec.decomps) decs.push_back(decomp_to_json(d));
    o["decomps"] = decs;
    o["z"] = tensor_to_json(rec.z);
    json lams = json::array();
    for (const auto& l : rec.lambda) lams.push_back(tensor_to_json(l));
    o["lambda"] = lams;
    o["rho"] = tensor_to_json(rec.rho);
    o["r"] = rec.r;
    o["s"] = rec.s;
    out << o.dump() << "\n";
  }

  json tail;
  tail["type"] = "termination";
  tail["reason"] = termination_reason_name(traj.reason);
  if (traj.failure) {
    tail["failure"] = json{{"k", traj.failure->k},
                           {"agent_index", traj.failure->agent_index},
                           {"what", traj.failure->what}};
  }
  out << tail.dump() << "\n";
  return out.str();
}

CoordinationTrajectory trajectory_from_jsonl(const std::string& text) {
  CoordinationTrajectory traj;
  std::istringstream in(text);
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json o = json::parse(line);
    std::string type = o.value("type", "");
    if (type == "config") {
      CoordinationConfig c;
      c.mode = coordination_mode_from_name(o.at("mode").get<std::string>());
      c.max_iter = o.at("max_iter").get<long>();
      c.primal_tol = o.at("primal_tol").get<double>();
      c.dual_tol = o.at("dual_tol").get<double>();
      c.adapt = o.at("adapt").get<bool>();
      c.agent_names = o.value("agents", std::vector<std::string>{});
      c.z0 = tensor_from_json(o.at("z0"));
      c.lambda0 = tensor_from_json(o.at("lambda0"));
      c.rho0 = tensor_from_json(o.at("rho0"));
      traj.config = std::move(c);
      have_header = true;
    } else if (type == "iteration") {
      IterationRecord rec;
      rec.k = o.at("k").get<long>();
      for (const auto& p : o.at("proposals")) rec.proposals.push_back(tensor_from_json(p));
      for (const auto& d : o.at("decomps")) rec.decomps.push_back(decomp_from_json(d));
      rec.z = tensor_from_json(o.at("z"));
      for (const auto& l : o.at("lambda")) rec.lambda.push_back(tensor_from_json(l));
      rec.rho = tensor_from_json(o.at("rho"));
      rec.r = o.at("r").get<double>();
      rec.s = o.at("s").get<double>();
      traj.records.push_back(std::move(rec));
    } else if (type == "termination") {
      traj.reason = termination_reason_from_name(o.at("reason").get<std::string>());
      if (o.contains("failure")) {
        AgentFailureInfo f;
        f.k = o.at("failure").at("k").get<long>();
        f.agent_index = o.at("failure").at("agent_index").get<int>();
        f.what = o.at("failure").at("what").get<std::string>();
        traj.failure = f;
      }
    }
  }
  if (!have_header) throw std::invalid_argument("trajectory_from_jsonl: missing config header");
  return traj;
}

}  // namespace optiloop
