#pragma once

// Legendre transforms: one-point and multi-point rate functions, the local
// claims rate K_x(u), and the decomposed sample-path action I(f) + I(g | f).

#include "fluctruin/mgf.hpp"

#include <limits>
#include <vector>

namespace fluctruin {

struct RateResult {
  /// Rate value; +inf when the target lies outside the effective domain.
  double value = 0.0;
  /// Optimising duals (one entry per time point; for rate_f the log z(t_j)).
  std::vector<double> omega;
  std::vector<double> theta;
  bool converged = false;
  bool infinite = false;
  int iterations = 0;
  double grad_norm = 0.0;
};

/// Grid path (f, g) on t_0 = 0 < t_1 < ... < t_d = T, linear in between.
struct PathGrid {
  std::vector<double> t;
  std::vector<double> f;
  std::vector<double> g;

  PathGrid() = default;
  PathGrid(std::vector<double> times, std::vector<double> fs, std::vector<double> gs);
  std::size_t intervals() const noexcept { return t.empty() ? 0 : t.size() - 1; }
  double horizon() const noexcept { return t.back(); }
  /// Central differences in the interior, one-sided at the ends.
  std::vector<double> f_prime() const;
  std::vector<double> g_prime() const;
  static std::vector<double> uniform_times(double T, std::size_t intervals);
};

RateResult rate_one_point(const ModelParams& p, double t, double f, double g);
RateResult rate_multi(const ModelParams& p, const TimeGrid& grid, const std::vector<double>& fs,
                      const std::vector<double>& gs);

/// Which conjugate defines K_x: the derivation's x log phi (default) or the
/// literal x phi of the displayed definition (diagnostics only).
enum class KVariant { LogPhi, LiteralPhi };

/// K_x(u) = sup_theta (theta u - x log phi(theta)); +inf when unattainable.
double k_local(const ModelParams& p, double x, double u, KVariant variant = KVariant::LogPhi);

/// K together with its optimiser and partial derivatives (LogPhi variant).
struct KLocal {
  double value = 0.0;
  double theta = 0.0;
  double du = 0.0, dx = 0.0;
  double duu = 0.0, dux = 0.0, dxx = 0.0;
  bool finite() const noexcept { return std::isfinite(value); }
};
KLocal k_local_derivs(const ModelParams& p, double x, double u);

/// Client-population action I(f) over the path's grid (f(0) must equal f0).
RateResult rate_f(const ModelParams& p, const PathGrid& path);
/// I(g | f) = int K_{f(s)}(g'(s)) ds, cell-midpoint rule.
double rate_g_given_f(const ModelParams& p, const PathGrid& path);
/// I(f) + I(g | f).
RateResult rate_sample_path(const ModelParams& p, const PathGrid& path);

}  // namespace fluctruin
