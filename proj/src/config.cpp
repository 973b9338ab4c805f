#include "fluctruin/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace fluctruin {
namespace {

void reject_unknown(const nlohmann::json& j, std::set<std::string> allowed, const char* where) {
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw std::invalid_argument(std::string("config: unknown key '") + key + "' in " + where);
}

std::vector<double> params_of(const nlohmann::json& j, std::size_t n, const std::string& family) {
  const auto v = j.value("params", std::vector<double>{});
  if (v.size() != n) throw std::invalid_argument("config: " + family + " expects " + std::to_string(n) + " params");
  return v;
}

}  // namespace

nlohmann::json distribution_to_json(const Distribution& d) {
  nlohmann::json j;
  j["family"] = std::string(d.family_name());
  j["params"] = d.parameters();
  if (d.inner()) j["inner"] = distribution_to_json(*d.inner());
  return j;
}

Distribution distribution_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: law must be an object");
  reject_unknown(j, {"family", "params", "inner"}, "law");
  const std::string family = j.at("family").get<std::string>();
  if (family == "exponential") return Distribution::exponential(params_of(j, 1, family)[0]);
  if (family == "uniform") {
    const auto v = params_of(j, 2, family);
    return Distribution::uniform(v[0], v[1]);
  }
  if (family == "deterministic") return Distribution::deterministic(params_of(j, 1, family)[0]);
  if (family == "gamma") {
    const auto v = params_of(j, 2, family);
    return Distribution::gamma(v[0], v[1]);
  }
  if (family == "excess-of") return Distribution::excess_of(distribution_from_json(j.at("inner")));
  throw std::invalid_argument("config: unknown law family '" + family + "'");
}

nlohmann::json model_to_json(const ModelParams& p) {
  return {{"lambda", p.lambda},
          {"f0", p.f0},
          {"nu", p.nu},
          {"r", p.r},
          {"claim", distribution_to_json(p.claim)},
          {"sojourn", distribution_to_json(p.sojourn)},
          {"residual", distribution_to_json(p.residual)}};
}

ModelParams model_from_json(const nlohmann::json& j) {
  reject_unknown(j, {"lambda", "f0", "nu", "r", "claim", "sojourn", "residual"}, "model");
  std::optional<Distribution> residual;
  if (j.contains("residual")) residual = distribution_from_json(j.at("residual"));
  return ModelParams(j.at("lambda").get<double>(), j.at("f0").get<double>(), j.at("nu").get<double>(),
                     j.at("r").get<double>(), distribution_from_json(j.at("claim")),
                     distribution_from_json(j.at("sojourn")), residual);
}

nlohmann::json config_to_json(const Config& c) {
  return {{"model", model_to_json(c.model)},
          {"sim", {{"n", c.sim.n}, {"T", c.sim.T}, {"replications", c.sim.replications}, {"seed", c.sim.seed}}},
          {"solver",
           {{"intervals", c.solver.intervals}, {"scan_points", c.solver.scan_points}, {"jobs", c.solver.jobs}}}};
}

Config config_from_json(const nlohmann::json& j) {
  reject_unknown(j, {"model", "sim", "solver"}, "top level");
  Config c{model_from_json(j.at("model")), {}, {}};
  if (j.contains("sim")) {
    const auto& s = j.at("sim");
    reject_unknown(s, {"n", "T", "replications", "seed"}, "sim");
    c.sim.n = s.value("n", c.sim.n);
    c.sim.T = s.value("T", c.sim.T);
    c.sim.replications = s.value("replications", c.sim.replications);
    c.sim.seed = s.value("seed", c.sim.seed);
  }
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    reject_unknown(s, {"intervals", "scan_points", "jobs"}, "solver");
    c.solver.intervals = s.value("intervals", c.solver.intervals);
    c.solver.scan_points = s.value("scan_points", c.solver.scan_points);
    c.solver.jobs = s.value("jobs", c.solver.jobs);
  }
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  return config_from_json(nlohmann::json::parse(in));
}

}  // namespace fluctruin
