#pragma once

// Ruin decay rates rho(t) and rho*, most likely paths by derivative
// recovery from the two-point cumulant, and a direct variational solver.

#include "fluctruin/ratefn.hpp"

#include <limits>
#include <optional>
#include <vector>

namespace fluctruin {

struct RuinQuery {
  enum class Target { HalfLine, Point };
  /// Ruin level u (half-line [u, inf)) or conditioning value a (point {a}).
  double level = 0.0;
  /// Terminal time of the path problem; +inf only for decay_rate.
  double T = 0.0;
  Target target = Target::HalfLine;
  /// Path grid intervals (d >= 2).
  std::size_t intervals = 64;
  /// Coarse t-scan resolution for decay_rate.
  std::size_t scan_points = 64;

  void validate() const;
};

struct MostLikelyPath {
  PathGrid path;
  double omega_star = 0.0;
  double theta_star = 0.0;
  /// rho(T) for the terminal set (recovery) or the discretised action (variational).
  double rate = 0.0;
  bool converged = false;
  /// Nodes where the cumulant derivative could not be formed.
  std::vector<std::size_t> failed_nodes;
};

struct DecayResult {
  double rho = 0.0;
  double t_star = 0.0;
  bool converged = false;
  /// Scan nodes (t, rho(t)) visited before refinement.
  std::vector<double> t, rate;
};

/// Legendre transform in theta at omega = 0: sup_theta (theta a - N_t(0, theta)).
/// The optimiser theta* has the sign of a - gbar(t).
RateResult terminal_rate(const ModelParams& p, double t, double a);

/// rho(t) for the ruin set {g >= u}: zero when u <= gbar(t).
RateResult decay_at_horizon(const ModelParams& p, double u, double t);

/// inf over t in (0, T] of rho(t); T = +inf scans geometrically.
DecayResult decay_rate(const ModelParams& p, double u, double T,
                       std::size_t scan_points = 64);

/// Path recovery f*(s) = dN_{s,T}/d omega_1, g*(s) = dN_{s,T}/d theta_1.
MostLikelyPath most_likely_path(const ModelParams& p, const RuinQuery& query);

struct VariationalOptions {
  double grad_tol = 1e-8;
  int max_iterations = 100;
};

/// Direct minimisation of I(f) + I(g | f) on the query grid with
/// g(T) = level; starts from the fluid path, a linear ramp and `seed` (if any).
MostLikelyPath most_likely_path_variational(const ModelParams& p, const RuinQuery& query,
                                            const PathGrid* seed = nullptr,
                                            const VariationalOptions& opts = {});

/// sup-norm distance between two paths on the same grid (f and g).
double path_distance(const PathGrid& a, const PathGrid& b);

}  // namespace fluctruin
