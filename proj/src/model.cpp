#include "fluctruin/model.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <stdexcept>

namespace fluctruin {

ModelParams::ModelParams(double lambda_, double f0_, double nu_, double r_, Distribution claim_,
                         Distribution sojourn_, std::optional<Distribution> residual_)
    : lambda(lambda_),
      f0(f0_),
      nu(nu_),
      r(r_),
      claim(std::move(claim_)),
      sojourn(std::move(sojourn_)),
      residual(residual_ ? std::move(*residual_) : Distribution::excess_of(sojourn)) {
  if (!(std::isfinite(lambda) && lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  if (!(std::isfinite(f0) && f0 >= 0.0)) throw std::invalid_argument("f0 must be >= 0");
  if (!(std::isfinite(nu) && nu >= 0.0)) throw std::invalid_argument("nu must be >= 0");
  if (!(std::isfinite(r) && r > 0.0)) throw std::invalid_argument("r must be > 0");
  if (!residual.has_bounded_density())
    throw std::invalid_argument("residual sojourn law must have a bounded density");
  if (!(claim.mgf_abscissa() > 0.0)) throw std::invalid_argument("claim law must be light-tailed");
}

double ModelParams::theta_cap() const noexcept {
  const double tm = theta_max();
  return std::isfinite(tm) ? tm - 1e-9 : std::numeric_limits<double>::infinity();
}

double log_phi(const ModelParams& p, double theta) {
  if (p.nu == 0.0) return -p.r * theta;
  const double b = p.claim.mgf(theta);
  if (!std::isfinite(b)) throw std::domain_error("log_phi: theta beyond the claim mgf abscissa");
  return -p.r * theta + p.nu * (b - 1.0);
}

double phi(const ModelParams& p, double theta) { return std::exp(log_phi(p, theta)); }

LogPhi log_phi_derivs(const ModelParams& p, double theta) {
  if (p.nu == 0.0) return {-p.r * theta, -p.r, 0.0};
  if (theta >= p.theta_max()) throw std::domain_error("log_phi: theta beyond the claim mgf abscissa");
  return {-p.r * theta + p.nu * (p.claim.mgf_derivative(theta, 0) - 1.0),
          -p.r + p.nu * p.claim.mgf_derivative(theta, 1), p.nu * p.claim.mgf_derivative(theta, 2)};
}

std::optional<double> adjustment_coefficient(const ModelParams& p) {
  if (!net_profit_holds(p) || p.nu == 0.0) return std::nullopt;
  // log phi is convex with log phi(0) = 0 and negative slope at 0: locate the
  // minimiser, then bracket the positive root beyond it.
  const double cap = p.theta_cap();
  const auto slope = [&p](double th) { return log_phi_derivs(p, th).d1; };
  double lo = 0.0, hi = std::isfinite(cap) ? 0.5 * cap : 1.0;
  while (slope(hi) < 0.0) {
    lo = hi;
    hi = std::isfinite(cap) ? hi + 0.5 * (cap - hi) : 2.0 * hi;
    if (hi - lo < 1e-14 || hi > 1e12) return std::nullopt;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double m = 0.5 * (lo + hi);
    (slope(m) < 0.0 ? lo : hi) = m;
  }
  double a = hi;
  double b = a;
  for (int i = 0;; ++i) {
    b = std::isfinite(cap) ? b + 0.5 * (cap - b) : 2.0 * b;
    if (log_phi(p, b) > 0.0) break;
    if (i > 200) return std::nullopt;
    a = b;
  }
  std::uintmax_t iters = 200;
  const auto f = [&p](double th) { return log_phi(p, th); };
  const auto res = boost::math::tools::toms748_solve(
      f, a, b, boost::math::tools::eps_tolerance<double>(50), iters);
  return 0.5 * (res.first + res.second);
}

double fluid_population(const ModelParams& p, double t) {
  if (t < 0.0) throw std::invalid_argument("fluid_population: t must be >= 0");
  // int_0^t tail = mean - E[(X - t)^+]
  const double arrivals = p.lambda == 0.0 ? 0.0 : p.lambda * (p.sojourn.mean() - p.sojourn.stop_loss(t));
  return p.f0 * p.residual.tail(t) + std::max(arrivals, 0.0);
}

double fluid_population_integral(const ModelParams& p, double t) {
  if (t <= 0.0) return 0.0;
  std::vector<double> bps = p.sojourn.breakpoints();
  for (double b : p.residual.breakpoints()) bps.push_back(b);
  const quad::Rule rule = quad::composite_gauss(0.0, t, bps, {.order = 16, .max_panel = 0.25});
  return rule.integrate([&p](double s) { return fluid_population(p, s); });
}

double fluid_claims(const ModelParams& p, double t) {
  return (p.nu * p.claim_mean() - p.r) * fluid_population_integral(p, t);
}

bool net_profit_holds(const ModelParams& p) { return p.r > p.claim_mean() * p.nu; }

}  // namespace fluctruin
