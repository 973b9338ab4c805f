#pragma once

// Model specification, fluid limits and the per-client Levy exponent.

#include "fluctruin/distribution.hpp"

#include <limits>
#include <optional>

namespace fluctruin {

/// Full model specification.
///
/// lambda: client arrival rate, f0: initial client mass, nu: per-client claim
/// rate, r: per-client premium rate. The residual law (remaining sojourn of
/// the clients present at time 0) defaults to the excess law of the sojourn
/// time. Immutable after construction.
struct ModelParams {
  double lambda;
  double f0;
  double nu;
  double r;
  Distribution claim;
  Distribution sojourn;
  Distribution residual;

  ModelParams(double lambda, double f0, double nu, double r, Distribution claim,
              Distribution sojourn, std::optional<Distribution> residual = std::nullopt);

  /// Mean claim size.
  double claim_mean() const { return claim.mean(); }
  /// Abscissa of the claim mgf: phi is finite for theta < theta_max().
  double theta_max() const noexcept { return claim.mgf_abscissa(); }
  /// Largest theta used by searches (theta_max - 1e-9).
  double theta_cap() const noexcept;
};

/// log phi(theta) together with its first two derivatives.
struct LogPhi {
  double value;
  double d1;
  double d2;
};

/// phi(theta) = exp(-r theta + nu (beta(theta) - 1)).
/// Throws std::domain_error at or beyond the claim mgf abscissa.
double phi(const ModelParams& p, double theta);
double log_phi(const ModelParams& p, double theta);
LogPhi log_phi_derivs(const ModelParams& p, double theta);

/// Positive root of log phi = 0 (adjustment coefficient); nullopt when the
/// net profit condition fails or no root exists below the abscissa.
std::optional<double> adjustment_coefficient(const ModelParams& p);

/// fbar(t) = f0 * residual.tail(t) + lambda * int_0^t sojourn.tail(s) ds
double fluid_population(const ModelParams& p, double t);
/// int_0^t fbar(s) ds
double fluid_population_integral(const ModelParams& p, double t);
/// gbar(t) = (nu * mbar - r) * int_0^t fbar(s) ds
double fluid_claims(const ModelParams& p, double t);
/// r > mbar * nu
bool net_profit_holds(const ModelParams& p);

}  // namespace fluctruin
