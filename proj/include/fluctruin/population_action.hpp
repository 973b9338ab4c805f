#pragma once

// Discretised client-population action
//   V(f) = sup_y { l(f) . y - Lambda(y) },
// with y = log z piecewise linear on the path grid (y(0) = 0) and
//   Lambda(y) = f0 log(int h° e^y + hbar°(T) e^{y(T)})
//             + lambda int_0^T (int_s^T h(r-s) e^{y(r)-y(s)} dr + hbar(T-s) e^{y(T)-y(s)} - 1) ds.
// The quadrature is laid out once per grid as a list of exponential terms
// exp(c . y), each with at most four non-zero coefficients.

#include "fluctruin/model.hpp"

#include <Eigen/Dense>

#include <vector>

namespace fluctruin {

class PopulationAction {
 public:
  /// times: t_0 = 0 < ... < t_d = T.
  PopulationAction(const ModelParams& p, std::vector<double> times, int order = 8);

  std::size_t size() const noexcept { return d_; }
  const std::vector<double>& times() const noexcept { return t_; }
  std::size_t term_count() const noexcept { return minus_.size() + plus_.size(); }

  /// l(f) from f_0..f_d (trapezoidal integration by parts of int y f').
  Eigen::VectorXd linear_term(const std::vector<double>& f) const;
  /// d l / d (f_1..f_d).
  const Eigen::MatrixXd& linear_map() const noexcept { return M_; }

  /// Lambda(y) with optional gradient and Hessian; +inf on overflow.
  double cumulant(const Eigen::VectorXd& y, Eigen::VectorXd* grad, Eigen::MatrixXd* hess) const;

  struct Solution {
    double value = 0.0;
    Eigen::VectorXd y;
    Eigen::MatrixXd hess;  // Hessian of Lambda at y
    bool converged = false;
    bool infinite = false;
    int iterations = 0;
    double grad_norm = 0.0;
  };
  /// sup_y (l . y - Lambda(y)).
  Solution conjugate(const Eigen::VectorXd& ell, const Eigen::VectorXd* warm = nullptr) const;

 private:
  struct Term {
    double w;
    int n;
    int idx[4];
    double c[4];
  };
  void add_hat(Term& term, double x, double sign) const;
  double sum_terms(const std::vector<Term>& terms, const Eigen::VectorXd& y, Eigen::VectorXd* grad,
                   Eigen::MatrixXd* hess) const;

  const ModelParams* p_;
  std::vector<double> t_;
  std::size_t d_;
  Eigen::MatrixXd M_;
  std::vector<Term> minus_;  // terms of the f0 log(...) part
  std::vector<Term> plus_;   // terms of the lambda part
};

}  // namespace fluctruin
