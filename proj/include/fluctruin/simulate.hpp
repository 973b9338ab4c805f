#pragma once

// Event-driven Monte Carlo of the scaled client count Fn/n and net claims
// Gn/n, ruin-probability estimation and empirical decay rates.

#include "fluctruin/model.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace fluctruin {

struct SimConfig {
  int n = 1;
  double T = 1.0;
  std::uint64_t replications = 1;
  std::uint64_t seed = 0;
  /// Snapshot times in [0, T].
  std::vector<double> record_grid;
  /// Draw the initial client count from Poisson(n f0) instead of rounding n f0.
  bool poisson_initial = false;
  bool record_departures = false;
  /// Worker threads; results do not depend on this.
  unsigned jobs = 1;

  void validate() const;
};

struct TrajectorySample {
  std::vector<double> times;
  std::vector<double> f;  // Fn(t) / n
  std::vector<double> g;  // Gn(t) / n
  bool ruined = false;
  double ruin_time = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t initial_clients = 0;
  std::uint64_t arrivals = 0;
  std::uint64_t claims = 0;
  std::vector<double> departures;
  /// Claim total, premium integral int Fn and final Gn (unscaled).
  double claim_total = 0.0;
  double client_time = 0.0;
  double g_final = 0.0;
  /// |running Gn - (claims - r int Fn)| relative to the claim total.
  double conservation_error = 0.0;
};

/// One replication; ruin is checked against Gn/n >= u when u is finite.
/// With stop_at_ruin the path ends at the ruin instant (snapshots after it are not filled).
TrajectorySample sample_trajectory(const ModelParams& p, const SimConfig& cfg, std::uint64_t index,
                                   double u = std::numeric_limits<double>::infinity(), bool stop_at_ruin = false);

/// Wilson score interval at confidence z.
struct Interval {
  double lo = 0.0, hi = 1.0;
};
Interval wilson_interval(std::uint64_t hits, std::uint64_t trials, double z = 1.959963984540054);

struct RuinEstimate {
  double p_hat = 0.0;
  Interval ci;
  std::uint64_t replications = 0;
  std::uint64_t hits = 0;
  double wall_seconds = 0.0;
  /// No ruin observed: ci is the one-sided 95% bound [0, 1 - 0.05^(1/N)].
  bool zero_hits = false;
};

RuinEstimate estimate_ruin_probability(const ModelParams& p, const SimConfig& cfg, double u);

struct DecayRow {
  int n = 0;
  RuinEstimate estimate;
  double rate = 0.0;  // -log(p_hat) / n
};
struct EmpiricalDecay {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<DecayRow> rows;
  std::vector<int> dropped;  // n with zero hits
};
/// Regresses -log p_hat_n on n; the slope estimates the decay rate.
EmpiricalDecay empirical_decay(const ModelParams& p, double u, double T, const std::vector<int>& n_list,
                               std::uint64_t replications, std::uint64_t seed = 1, unsigned jobs = 1);

struct ConditionedEnsemble {
  std::vector<double> times;
  std::vector<double> mean_f;        // over ruined replications
  std::vector<double> mean_f_all;    // over all replications
  std::uint64_t hits = 0;
  std::uint64_t replications = 0;
};
/// Mean scaled client path given ruin by cfg.T; needs >= min_hits ruins.
ConditionedEnsemble conditioned_ensemble(const ModelParams& p, const SimConfig& cfg, double u,
                                         std::uint64_t min_hits = 100);

struct ChiSquare {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 0.0;
};
/// Chi-square test of the client count at time t against Poisson(n f0), for
/// a stationary start (Poisson initial count, residual = excess of sojourn).
ChiSquare occupancy_chi_square(const ModelParams& p, const SimConfig& cfg, double t);

}  // namespace fluctruin
