#pragma once

// Probability laws on [0, inf) used for claim sizes, sojourn times and
// residual sojourn times.

#include <memory>
#include <random>
#include <string_view>
#include <vector>

#include "fluctruin/quadrature.hpp"

namespace fluctruin {

class Distribution {
 public:
  enum class Family { Exponential, Uniform, Deterministic, Gamma, ExcessOf };

  static Distribution exponential(double rate);
  static Distribution uniform(double lower, double upper);
  static Distribution deterministic(double value);
  /// Shape must be >= 1 (bounded density, integrable endpoint behaviour).
  static Distribution gamma(double shape, double rate);
  /// Stationary excess (equilibrium residual) law of `inner`:
  /// density inner.tail(t) / inner.mean(). `inner` may not itself be an
  /// excess-of law.
  static Distribution excess_of(const Distribution& inner);

  Family family() const noexcept { return family_; }
  std::string_view family_name() const noexcept;
  /// Family parameters in declaration order (rate | lower, upper | value |
  /// shape, rate); empty for excess-of.
  std::vector<double> parameters() const;
  const Distribution* inner() const noexcept { return inner_.get(); }

  /// Zero for the atomic (deterministic) law.
  double density(double t) const;
  /// P(X > t)
  double tail(double t) const;
  /// E[(X - t)^+]
  double stop_loss(double t) const;
  double mean() const;
  /// E[X^k], 0 <= k <= 20.
  double raw_moment(int k) const;
  double variance() const;

  /// E exp(theta X); +inf at or beyond the abscissa.
  double mgf(double theta) const;
  /// d^order/dtheta^order of the mgf, order in {0, 1, 2}.
  double mgf_derivative(double theta, int order) const;
  /// sup{theta : mgf(theta) < inf}; +inf for bounded support.
  double mgf_abscissa() const noexcept;

  double sample(std::mt19937_64& rng) const;

  bool is_atomic() const noexcept { return family_ == Family::Deterministic; }
  bool has_bounded_density() const noexcept;
  /// Points where the density (or the atom) is not smooth.
  std::vector<double> breakpoints() const;
  /// Density has an integrable derivative singularity at 0.
  bool singular_at_zero() const noexcept;
  double support_upper() const noexcept;
  /// Point beyond which tail(t) < eps (support end for bounded laws).
  double truncation_point(double eps = 1e-12) const;

  /// Law of c X.
  Distribution scaled(double c) const;

  /// Rule for the integral of g against the law over (a, b]: weights carry
  /// the density (or the unit atom).
  quad::Rule density_rule(double a, double b, const quad::RuleOptions& opts = {}) const;
  /// Rule for the integral of tail(x) g(x) dx over [a, b].
  quad::Rule tail_rule(double a, double b, const quad::RuleOptions& opts = {}) const;

 private:
  Distribution(Family f, double p1, double p2, std::shared_ptr<const Distribution> inner);
  double excess_series(double theta, int order) const;

  Family family_;
  double p1_ = 0.0;
  double p2_ = 0.0;
  std::shared_ptr<const Distribution> inner_;
};

}  // namespace fluctruin
