#pragma once

// Small optimisation toolkit: golden-section search, a damped Newton
// maximiser for concave objectives, and finite-difference derivatives.

#include <Eigen/Dense>

#include <functional>

namespace fluctruin::opt {

struct ScalarMin {
  double x = 0.0;
  double value = 0.0;
  int evaluations = 0;
};

/// Minimise a unimodal f on [a, b] to relative tolerance rel_tol in x.
ScalarMin golden_section_min(const std::function<double(double)>& f, double a, double b,
                             double rel_tol = 1e-4, int max_evaluations = 200);

/// Objective value with optional gradient / Hessian outputs. Returns -inf
/// (for maximisation) outside its domain.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad,
                                       Eigen::MatrixXd* hess)>;

struct NewtonOptions {
  double grad_tol = 1e-7;
  int max_iterations = 200;
  /// Dual norm beyond which a still-increasing objective is declared unbounded.
  double norm_cap = 1e3;
};

struct NewtonResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  /// The supremum diverges along a ray (value reported as +inf).
  bool unbounded = false;
};

/// Maximise a concave objective by damped Newton steps with Levenberg
/// regularisation, backtracking line search and a gradient-ascent fallback.
NewtonResult maximize_concave(const Objective& f, const Eigen::VectorXd& x0,
                              const NewtonOptions& opts = {});

/// Wraps a value-only function into an Objective using central differences
/// (relative step `step`, Hessian from second differences).
Objective finite_difference(std::function<double(const Eigen::VectorXd&)> f, double step = 1e-4);

/// Central difference with one Richardson extrapolation level:
/// (4 D(h/2) - D(h)) / 3.
double richardson_derivative(const std::function<double(double)>& f, double x, double h);

}  // namespace fluctruin::opt
