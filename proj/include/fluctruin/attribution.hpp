#pragma once

// Share of a terminal capital deviation attributable to client-count
// fluctuations (E1) versus claim fluctuations (E2 = 1 - E1).

#include "fluctruin/pathsolver.hpp"

#include <string>
#include <vector>

namespace fluctruin {

struct AttributionResult {
  double a = 0.0;
  double T = 0.0;
  double e1 = 0.0;
  double e2 = 0.0;
  /// (r - mbar nu) int (f* - fbar)
  double numerator = 0.0;
  /// gbar(T) - a
  double denominator = 0.0;
  MostLikelyPath path;
};

/// E1 from the most likely path conditioned on g(T) = a (grid of `intervals`).
AttributionResult e1(const ModelParams& p, double a, double T, std::size_t intervals = 64);

/// Closed-form small-deviation limit for exponential sojourn times.
double e1_limit_exponential(const ModelParams& p, double T);

struct E1Extrapolation {
  std::vector<double> eps;
  std::vector<double> e1;
  /// Polynomial extrapolation of e1(gbar(T) - eps) to eps = 0.
  double limit = 0.0;
};
/// Default schedule eps in {0.2, 0.1, 0.05}, a = gbar(T) - eps.
E1Extrapolation e1_extrapolated(const ModelParams& p, double T, std::vector<double> eps = {0.2, 0.1, 0.05},
                                std::size_t intervals = 64);

/// Same model with the claim law rescaled so that nu * mbar keeps its value.
ModelParams with_claim_rate(const ModelParams& p, double nu);

struct SweepRow {
  double nu = 0.0;
  double a = 0.0;
  double e1 = 0.0;
  double e1_limit = 0.0;  // NaN for non-exponential sojourn
  bool ok = true;
  std::string error;
};
/// E1 over a grid of claim rates at fixed nu * mbar; cells are independent
/// and are spread over `jobs` threads. Rows are ordered nu-major.
std::vector<SweepRow> attribution_sweep(const ModelParams& p, const std::vector<double>& a_list,
                                        const std::vector<double>& nu_grid, double T, unsigned jobs = 1,
                                        std::size_t intervals = 64);

struct MarginalCheck {
  std::vector<double> t, c, w;
  double slope = 0.0;
  double r2 = 0.0;
};
/// Regresses the capital profile c(t) of the extra clients on the optimal
/// allocation profile (lambda + fbar mu) [((r - nu mbar)/mu)(1 - e^{-mu (T - t)})]^2
/// for a = gbar(T) - eps. Exponential sojourn only.
MarginalCheck marginal_rate_check(const ModelParams& p, double T, double eps, std::size_t intervals = 64);

}  // namespace fluctruin
