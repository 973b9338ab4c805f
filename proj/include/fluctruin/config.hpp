#pragma once

// JSON configuration: model / sim / solver sections.
//
//   {"model":  {"lambda": 1, "f0": 1, "nu": 3, "r": 3,
//               "claim":   {"family": "exponential", "params": [1.5]},
//               "sojourn": {"family": "exponential", "params": [1.0]},
//               "residual": {...}},                       // optional
//    "sim":    {"n": 20, "T": 5, "replications": 100000, "seed": 1},
//    "solver": {"intervals": 64, "scan_points": 64, "jobs": 1}}
//
// Laws: exponential [rate], uniform [lower, upper], deterministic [value],
// gamma [shape, rate], excess-of (no params, "inner": law).

#include "fluctruin/model.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>

namespace fluctruin {

struct SimSection {
  int n = 20;
  double T = 5.0;
  std::uint64_t replications = 100000;
  std::uint64_t seed = 1;
};

struct SolverSection {
  std::size_t intervals = 64;
  std::size_t scan_points = 64;
  unsigned jobs = 1;
};

struct Config {
  ModelParams model;
  SimSection sim;
  SolverSection solver;
};

nlohmann::json distribution_to_json(const Distribution& d);
Distribution distribution_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const ModelParams& p);
ModelParams model_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const Config& c);
/// Missing sim/solver keys keep their defaults; unknown keys are rejected.
Config config_from_json(const nlohmann::json& j);
Config load_config(const std::string& path);

}  // namespace fluctruin
