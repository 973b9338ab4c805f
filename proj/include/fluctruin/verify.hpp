#pragma once

// Cross-module property suite behind `fluctruin verify`.

#include "fluctruin/config.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace fluctruin {

struct Check {
  std::string name;
  bool passed = false;
  /// Worst observed discrepancy (or the statistic being thresholded).
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
  double seconds = 0.0;
};

struct VerifyOptions {
  /// Ruin level and horizon for the two-solver comparison.
  double u = 5.0;
  double T = 5.0;
  std::size_t intervals = 64;
  /// Monte Carlo leg (small-surplus level; n-list regressed against the LDP rate).
  bool monte_carlo = true;
  double mc_u = 0.5;
  double mc_T = 5.0;
  std::vector<int> mc_n = {5, 10, 20};
  std::uint64_t mc_replications = 100000;
  std::uint64_t seed = 1;
  unsigned jobs = 1;
};

std::vector<Check> run_property_suite(const ModelParams& p, const VerifyOptions& opts = {});
nlohmann::json report_json(const std::vector<Check>& checks);
bool all_passed(const std::vector<Check>& checks);

}  // namespace fluctruin
