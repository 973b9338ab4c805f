#include "fluctruin/distribution.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fluctruin {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// I_j(c) = int_0^1 u^j e^{c u} du for j = 0, 1, 2.
double uniform_exp_moment(double c, int j) {
  if (std::abs(c) < 1.0) {
    const quad::Rule& gl = quad::gauss_legendre(32);
    double acc = 0.0;
    for (std::size_t i = 0; i < gl.size(); ++i) {
      const double u = 0.5 * (gl.nodes[i] + 1.0);
      acc += 0.5 * gl.weights[i] * std::pow(u, j) * std::exp(c * u);
    }
    return acc;
  }
  double val = std::expm1(c) / c;
  for (int k = 1; k <= j; ++k) val = (std::exp(c) - k * val) / c;
  return val;
}

bool is_integer(double x) { return std::abs(x - std::round(x)) < 1e-12; }

}  // namespace

Distribution::Distribution(Family f, double p1, double p2,
                           std::shared_ptr<const Distribution> inner)
    : family_(f), p1_(p1), p2_(p2), inner_(std::move(inner)) {}

Distribution Distribution::exponential(double rate) {
  require(std::isfinite(rate) && rate > 0.0, "exponential: rate must be positive");
  return {Family::Exponential, rate, 0.0, nullptr};
}

Distribution Distribution::uniform(double lower, double upper) {
  require(std::isfinite(lower) && std::isfinite(upper) && lower >= 0.0 && upper > lower,
          "uniform: need 0 <= lower < upper");
  return {Family::Uniform, lower, upper, nullptr};
}

Distribution Distribution::deterministic(double value) {
  require(std::isfinite(value) && value > 0.0, "deterministic: value must be positive");
  return {Family::Deterministic, value, 0.0, nullptr};
}

Distribution Distribution::gamma(double shape, double rate) {
  require(std::isfinite(shape) && shape >= 1.0, "gamma: shape must be >= 1");
  require(std::isfinite(rate) && rate > 0.0, "gamma: rate must be positive");
  return {Family::Gamma, shape, rate, nullptr};
}

Distribution Distribution::excess_of(const Distribution& inner) {
  require(inner.family() != Family::ExcessOf, "excess-of: nested excess laws are not supported");
  return {Family::ExcessOf, 0.0, 0.0, std::make_shared<const Distribution>(inner)};
}

std::string_view Distribution::family_name() const noexcept {
  switch (family_) {
    case Family::Exponential: return "exponential";
    case Family::Uniform: return "uniform";
    case Family::Deterministic: return "deterministic";
    case Family::Gamma: return "gamma";
    case Family::ExcessOf: return "excess-of";
  }
  return "unknown";
}

std::vector<double> Distribution::parameters() const {
  switch (family_) {
    case Family::Exponential:
    case Family::Deterministic: return {p1_};
    case Family::Uniform:
    case Family::Gamma: return {p1_, p2_};
    case Family::ExcessOf: return {};
  }
  return {};
}

double Distribution::density(double t) const {
  if (t < 0.0) return 0.0;
  switch (family_) {
    case Family::Exponential: return p1_ * std::exp(-p1_ * t);
    case Family::Uniform: return (t >= p1_ && t < p2_) ? 1.0 / (p2_ - p1_) : 0.0;
    case Family::Deterministic: return 0.0;
    case Family::Gamma:
      if (t == 0.0) return p1_ == 1.0 ? p2_ : 0.0;
      return std::exp(p1_ * std::log(p2_) + (p1_ - 1.0) * std::log(t) - p2_ * t -
                      std::lgamma(p1_));
    case Family::ExcessOf: return inner_->tail(t) / inner_->mean();
  }
  return 0.0;
}

double Distribution::tail(double t) const {
  if (t < 0.0) return 1.0;
  switch (family_) {
    case Family::Exponential: return std::exp(-p1_ * t);
    case Family::Uniform:
      if (t < p1_) return 1.0;
      if (t >= p2_) return 0.0;
      return (p2_ - t) / (p2_ - p1_);
    case Family::Deterministic: return t < p1_ ? 1.0 : 0.0;
    case Family::Gamma: return boost::math::gamma_q(p1_, p2_ * t);
    case Family::ExcessOf: return inner_->stop_loss(t) / inner_->mean();
  }
  return 0.0;
}

double Distribution::stop_loss(double t) const {
  if (t < 0.0) return mean() - t;
  switch (family_) {
    case Family::Exponential: return std::exp(-p1_ * t) / p1_;
    case Family::Uniform:
      if (t <= p1_) return 0.5 * (p1_ + p2_) - t;
      if (t >= p2_) return 0.0;
      return (p2_ - t) * (p2_ - t) / (2.0 * (p2_ - p1_));
    case Family::Deterministic: return std::max(p1_ - t, 0.0);
    case Family::Gamma:
      return p1_ / p2_ * boost::math::gamma_q(p1_ + 1.0, p2_ * t) -
             t * boost::math::gamma_q(p1_, p2_ * t);
    case Family::ExcessOf: {
      // E_e[(X - t)^+] = E_i[((X - t)^+)^2] / (2 m)
      const auto f = [this, t](double x) { return inner_->stop_loss(x); };
      const double upper = inner_->truncation_point(1e-16);
      if (t >= upper) return 0.0;
      const auto r = quad::adaptive_simpson(f, t, upper, 1e-13);
      return r.value / inner_->mean();
    }
  }
  return 0.0;
}

double Distribution::mean() const { return raw_moment(1); }

double Distribution::raw_moment(int k) const {
  if (k < 0 || k > 20) throw std::invalid_argument("raw_moment: order out of range");
  if (k == 0) return 1.0;
  switch (family_) {
    case Family::Exponential: return std::tgamma(k + 1.0) / std::pow(p1_, k);
    case Family::Uniform:
      return (std::pow(p2_, k + 1) - std::pow(p1_, k + 1)) / ((k + 1.0) * (p2_ - p1_));
    case Family::Deterministic: return std::pow(p1_, k);
    case Family::Gamma: {
      double acc = 1.0;
      for (int i = 0; i < k; ++i) acc *= (p1_ + i) / p2_;
      return acc;
    }
    case Family::ExcessOf: return inner_->raw_moment(k + 1) / ((k + 1.0) * inner_->mean());
  }
  return 0.0;
}

double Distribution::variance() const {
  const double m = mean();
  return raw_moment(2) - m * m;
}

double Distribution::mgf_abscissa() const noexcept {
  switch (family_) {
    case Family::Exponential: return p1_;
    case Family::Gamma: return p2_;
    case Family::Uniform:
    case Family::Deterministic: return kInf;
    case Family::ExcessOf: return inner_->mgf_abscissa();
  }
  return kInf;
}

double Distribution::mgf(double theta) const { return mgf_derivative(theta, 0); }

double Distribution::excess_series(double theta, int order) const {
  // G(theta) = (beta_i(theta) - 1) / (theta m) expanded around 0.
  const double m = inner_->mean();
  double acc = 0.0;
  double fact_k1 = 1.0;  // (k+1)!
  for (int k = 0; k <= 17; ++k) {
    fact_k1 *= (k + 1);
    if (k < order) continue;
    double falling = 1.0;  // k! / (k - order)!
    for (int i = 0; i < order; ++i) falling *= (k - i);
    acc += inner_->raw_moment(k + 1) * falling * std::pow(theta, k - order) / fact_k1;
  }
  return acc / m;
}

double Distribution::mgf_derivative(double theta, int order) const {
  if (order < 0 || order > 2) throw std::invalid_argument("mgf_derivative: order must be 0, 1 or 2");
  if (std::isnan(theta)) return theta;
  if (theta >= mgf_abscissa()) return kInf;
  switch (family_) {
    case Family::Exponential: {
      const double d = p1_ - theta;
      if (order == 0) return p1_ / d;
      if (order == 1) return p1_ / (d * d);
      return 2.0 * p1_ / (d * d * d);
    }
    case Family::Gamma: {
      const double d = p2_ - theta;
      const double b = std::pow(p2_ / d, p1_);
      if (order == 0) return b;
      if (order == 1) return p1_ / d * b;
      return p1_ * (p1_ + 1.0) / (d * d) * b;
    }
    case Family::Deterministic: return std::pow(p1_, order) * std::exp(theta * p1_);
    case Family::Uniform: {
      // X = a + L U
      const double a = p1_, len = p2_ - p1_, c = theta * len;
      const double scale = std::exp(theta * a);
      const double i0 = uniform_exp_moment(c, 0);
      if (order == 0) return scale * i0;
      const double i1 = uniform_exp_moment(c, 1);
      if (order == 1) return scale * (a * i0 + len * i1);
      const double i2 = uniform_exp_moment(c, 2);
      return scale * (a * a * i0 + 2.0 * a * len * i1 + len * len * i2);
    }
    case Family::ExcessOf: {
      const double scale = std::sqrt(inner_->raw_moment(2));
      if (std::abs(theta) * scale < 0.1) return excess_series(theta, order);
      const double m = inner_->mean();
      const double n0 = inner_->mgf(theta) - 1.0;
      if (order == 0) return n0 / (theta * m);
      const double n1 = inner_->mgf_derivative(theta, 1);
      if (order == 1) return (n1 * theta - n0) / (theta * theta * m);
      const double n2 = inner_->mgf_derivative(theta, 2);
      return (n2 * theta * theta - 2.0 * n1 * theta + 2.0 * n0) / (theta * theta * theta * m);
    }
  }
  return kInf;
}

double Distribution::sample(std::mt19937_64& rng) const {
  switch (family_) {
    case Family::Exponential: return std::exponential_distribution<double>(p1_)(rng);
    case Family::Uniform: return std::uniform_real_distribution<double>(p1_, p2_)(rng);
    case Family::Deterministic: return p1_;
    case Family::Gamma: return std::gamma_distribution<double>(p1_, 1.0 / p2_)(rng);
    case Family::ExcessOf: {
      // length-biased draw from the inner law, then a uniform fraction of it
      double biased = 0.0;
      const auto& in = *inner_;
      const auto ip = in.parameters();
      switch (in.family()) {
        case Family::Exponential:
          biased = std::gamma_distribution<double>(2.0, 1.0 / ip[0])(rng);
          break;
        case Family::Gamma:
          biased = std::gamma_distribution<double>(ip[0] + 1.0, 1.0 / ip[1])(rng);
          break;
        case Family::Uniform: {
          const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
          biased = std::sqrt(ip[0] * ip[0] + u * (ip[1] * ip[1] - ip[0] * ip[0]));
          break;
        }
        case Family::Deterministic: biased = ip[0]; break;
        case Family::ExcessOf: throw std::logic_error("nested excess-of");
      }
      return biased * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    }
  }
  return 0.0;
}

bool Distribution::has_bounded_density() const noexcept {
  return family_ != Family::Deterministic;
}

std::vector<double> Distribution::breakpoints() const {
  switch (family_) {
    case Family::Uniform: return {p1_, p2_};
    case Family::Deterministic: return {p1_};
    case Family::ExcessOf: return inner_->breakpoints();
    default: return {};
  }
}

bool Distribution::singular_at_zero() const noexcept {
  if (family_ == Family::Gamma) return !is_integer(p1_);
  if (family_ == Family::ExcessOf) return inner_->singular_at_zero();
  return false;
}

double Distribution::support_upper() const noexcept {
  switch (family_) {
    case Family::Uniform: return p2_;
    case Family::Deterministic: return p1_;
    case Family::ExcessOf: return inner_->support_upper();
    default: return kInf;
  }
}

double Distribution::truncation_point(double eps) const {
  const double upper = support_upper();
  if (std::isfinite(upper)) return upper;
  if (family_ == Family::Exponential) return -std::log(eps) / p1_;
  double t = std::max(mean(), 1e-3);
  for (int i = 0; i < 200 && tail(t) >= eps; ++i) t *= 1.25;
  return t;
}

Distribution Distribution::scaled(double c) const {
  require(std::isfinite(c) && c > 0.0, "scaled: factor must be positive");
  switch (family_) {
    case Family::Exponential: return exponential(p1_ / c);
    case Family::Uniform: return uniform(c * p1_, c * p2_);
    case Family::Deterministic: return deterministic(c * p1_);
    case Family::Gamma: return gamma(p1_, p2_ / c);
    case Family::ExcessOf: return excess_of(inner_->scaled(c));
  }
  return *this;
}

quad::Rule Distribution::density_rule(double a, double b, const quad::RuleOptions& opts) const {
  quad::Rule rule;
  if (is_atomic()) {
    if (a < p1_ && p1_ <= b) rule.push(p1_, 1.0);
    return rule;
  }
  const double lo = std::max(a, 0.0);
  const double hi = std::min(b, support_upper());
  if (!(hi > lo)) return rule;
  const auto bps = breakpoints();
  quad::RuleOptions o = opts;
  o.graded_left = singular_at_zero() && lo == 0.0;
  rule = quad::composite_gauss(lo, hi, bps, o);
  for (std::size_t i = 0; i < rule.size(); ++i) rule.weights[i] *= density(rule.nodes[i]);
  return rule;
}

quad::Rule Distribution::tail_rule(double a, double b, const quad::RuleOptions& opts) const {
  const double lo = std::max(a, 0.0);
  quad::Rule rule;
  if (!(b > lo)) return rule;
  quad::RuleOptions o = opts;
  o.graded_left = false;
  rule = quad::composite_gauss(lo, b, breakpoints(), o);
  for (std::size_t i = 0; i < rule.size(); ++i) rule.weights[i] *= tail(rule.nodes[i]);
  // integrals over [a, 0) see tail == 1
  if (a < 0.0) {
    quad::Rule neg = quad::composite_gauss(a, std::min(b, 0.0), {}, o);
    rule.append(neg);
  }
  return rule;
}

}  // namespace fluctruin
