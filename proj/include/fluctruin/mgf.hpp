#pragma once

// Moment generating functions of the scaled client/claims pair (F, G):
// one-point, multi-point and the sample-path limits, plus the joint
// cumulant N = f0 log M^- + log M^+.

#include "fluctruin/model.hpp"

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace fluctruin {

/// Ordered observation times 0 <= t_1 < ... < t_d, with t_0 = 0.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> times);
  std::size_t size() const noexcept { return t_.size(); }
  /// t_k for k = 0..d (t_0 = 0).
  double time(std::size_t k) const noexcept { return k == 0 ? 0.0 : t_[k - 1]; }
  /// delta_k = t_k - t_{k-1}, k = 1..d.
  double delta(std::size_t k) const noexcept { return time(k) - time(k - 1); }
  const std::vector<double>& times() const noexcept { return t_; }

 private:
  std::vector<double> t_;
};

/// Duals (omega_j, theta_j), j = 1..d, with their partial sums.
struct DualVector {
  std::vector<double> omega;
  std::vector<double> theta;

  DualVector() = default;
  DualVector(std::vector<double> w, std::vector<double> th);
  static DualVector zeros(std::size_t d) { return {std::vector<double>(d), std::vector<double>(d)}; }
  std::size_t size() const noexcept { return omega.size(); }
  /// Omega_k = sum_{j<=k} omega_j, k = 0..d.
  std::vector<double> Omega() const;
  /// Theta_k = sum_{j>=k} theta_j, k = 1..d+1 (index 0 unused).
  std::vector<double> Theta() const;
};

/// How the one-point M^+ exponent is closed: the normalised reading
/// (lambda(int ... - t)) is the default; the literal "- 1" reading is kept
/// for comparison only.
enum class PlusReading { MinusT, MinusOne };

double m_minus_one(const ModelParams& p, double t, double omega, double theta);
double log_m_plus_one(const ModelParams& p, double t, double omega, double theta,
                      PlusReading reading = PlusReading::MinusT);
double m_plus_one(const ModelParams& p, double t, double omega, double theta,
                  PlusReading reading = PlusReading::MinusT);

double m_minus_multi(const ModelParams& p, const TimeGrid& grid, const DualVector& duals);
double log_m_plus_multi(const ModelParams& p, const TimeGrid& grid, const DualVector& duals);
double m_plus_multi(const ModelParams& p, const TimeGrid& grid, const DualVector& duals);
/// f0 log M^- + log M^+ at the grid; +inf when a dual leaves the domain.
double log_n(const ModelParams& p, const TimeGrid& grid, const DualVector& duals);

/// Joint cumulant N_t(omega, theta) at a single time, with analytic
/// gradient and Hessian in (omega, theta). Quadrature rules are built once
/// per t, so repeated evaluation is cheap.
class OnePointCumulant {
 public:
  struct Eval {
    double value = 0.0;  // +inf outside the domain
    Eigen::Vector2d grad = Eigen::Vector2d::Zero();
    Eigen::Matrix2d hess = Eigen::Matrix2d::Zero();
    bool finite() const noexcept { return std::isfinite(value); }
  };

  OnePointCumulant(const ModelParams& p, double t);
  double t() const noexcept { return t_; }
  Eval eval(double omega, double theta) const;
  double value(double omega, double theta) const { return eval(omega, theta).value; }
  double m_minus(double omega, double theta) const;
  double log_m_plus(double omega, double theta, PlusReading reading = PlusReading::MinusT) const;

 private:
  struct Moments {
    double shift = 0.0;  // s_j are scaled by exp(-shift)
    double s[3] = {0, 0, 0};
  };
  struct Table {
    std::vector<double> x, w0, w1, w2;
    double xmax = 0.0;
    Moments moments(double L) const;
  };

  const ModelParams* p_;
  double t_;
  Table minus_;      // residual density on (0, t]
  double minus_tail_;  // residual tail at t
  Table plus_dens_;  // sojourn density times (t - r) on (0, t]
  Table plus_tail_;  // sojourn tail on [0, t]
};

/// Continuous duals on [0, T]: node values on a uniform grid, linear
/// interpolation in between.
class DualFunction {
 public:
  DualFunction(double T, std::vector<double> omega, std::vector<double> theta);
  static DualFunction sample(double T, std::size_t intervals, const std::function<double(double)>& w,
                             const std::function<double(double)>& th);

  double horizon() const noexcept { return T_; }
  std::size_t intervals() const noexcept { return omega_.size() - 1; }
  double step() const noexcept { return T_ / static_cast<double>(intervals()); }
  double omega(double s) const;
  double theta(double s) const;
  /// int_0^s omega
  double Omega(double s) const;
  /// int_s^T theta
  double Theta(double s) const;

 private:
  double interp(const std::vector<double>& v, double s) const;
  double T_;
  std::vector<double> omega_, theta_;
  std::vector<double> omega_cum_, theta_cum_;  // int_0^{node} of each
};

/// Psi(u) = Omega(u) + int_0^u log phi(Theta(s)) ds, tabulated at the dual
/// grid nodes and interpolated by cubic Hermite using Psi' = omega + log phi(Theta).
class PsiTable {
 public:
  PsiTable(const ModelParams& p, const DualFunction& duals);
  double operator()(double u) const;

 private:
  const DualFunction* duals_;
  std::vector<double> value_, slope_;
};

double psi(const ModelParams& p, const DualFunction& duals, double u);
double m_minus_limit(const ModelParams& p, const DualFunction& duals);
double log_m_plus_limit(const ModelParams& p, const DualFunction& duals);
double m_plus_limit(const ModelParams& p, const DualFunction& duals);

/// Finite-grid duals t_k = k Delta, theta_k = Delta theta(k Delta),
/// omega_k = Delta omega(k Delta) for d = T / Delta steps.
std::pair<TimeGrid, DualVector> embed_duals(double T, std::size_t d,
                                            const std::function<double(double)>& w,
                                            const std::function<double(double)>& th);

}  // namespace fluctruin
