#include "fluctruin/optimize.hpp"

#include <cmath>
#include <limits>

namespace fluctruin::opt {

ScalarMin golden_section_min(const std::function<double(double)>& f, double a, double b,
                             double rel_tol, int max_evaluations) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  int evals = 2;
  while (b - a > rel_tol * std::max(std::abs(c), 1e-12) && evals < max_evaluations) {
    // ties go left so flat minima resolve to the smallest abscissa
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
    ++evals;
  }
  return fc <= fd ? ScalarMin{c, fc, evals} : ScalarMin{d, fd, evals};
}

NewtonResult maximize_concave(const Objective& f, const Eigen::VectorXd& x0, const NewtonOptions& opts) {
  const Eigen::Index n = x0.size();
  NewtonResult res;
  res.x = x0;
  Eigen::VectorXd g(n);
  Eigen::MatrixXd H(n, n);
  double val = f(res.x, &g, &H);
  if (!std::isfinite(val)) {
    res.value = val;
    return res;
  }
  double mu = 0.0;
  for (int it = 0; it < opts.max_iterations; ++it) {
    res.iterations = it;
    res.grad_norm = g.norm();
    if (res.grad_norm < opts.grad_tol) {
      res.converged = true;
      break;
    }
    if (res.x.norm() > opts.norm_cap) {
      // probe further along the current ray
      const Eigen::VectorXd far = 2.0 * res.x;
      const double vfar = f(far, nullptr, nullptr);
      if (std::isfinite(vfar) && vfar > val + 1e-6 * (1.0 + std::abs(val))) {
        res.unbounded = true;
        res.value = std::numeric_limits<double>::infinity();
        res.grad_norm = g.norm();
        return res;
      }
      // supremum approached at infinity but finite
      res.converged = true;
      break;
    }
    // Newton direction on -H (positive definite for a concave objective)
    Eigen::VectorXd step;
    Eigen::MatrixXd A = -H;
    for (int tries = 0; tries < 30; ++tries) {
      Eigen::MatrixXd Areg = A;
      if (mu > 0.0) Areg.diagonal().array() += mu * (1.0 + A.diagonal().cwiseAbs().maxCoeff());
      Eigen::LLT<Eigen::MatrixXd> llt(Areg);
      if (llt.info() == Eigen::Success) {
        step = llt.solve(g);
        if (step.allFinite()) break;
      }
      mu = mu == 0.0 ? 1e-8 : mu * 10.0;
    }
    if (step.size() == 0 || !step.allFinite() || step.dot(g) <= 0.0) step = g;
    // Newton decrement: predicted gain below the noise floor of f
    if (step.dot(g) < 1e-12 * (1.0 + std::abs(val))) {
      res.converged = true;
      break;
    }

    // line search on values only; derivatives at the accepted point
    double alpha = 1.0;
    bool accepted = false;
    Eigen::VectorXd xn, gn(n);
    Eigen::MatrixXd Hn(n, n);
    double vn = 0.0;
    for (int ls = 0; ls < 40; ++ls) {
      xn = res.x + alpha * step;
      vn = f(xn, nullptr, nullptr);
      if (std::isfinite(vn) && vn >= val + 1e-4 * alpha * step.dot(g) - 1e-15 * std::abs(val)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // fall back to a short gradient step
      alpha = 1.0 / (1.0 + H.diagonal().cwiseAbs().maxCoeff());
      for (int ls = 0; ls < 20 && !accepted; ++ls) {
        xn = res.x + alpha * g;
        vn = f(xn, nullptr, nullptr);
        accepted = std::isfinite(vn) && vn >= val;
        alpha *= 0.5;
      }
      if (!accepted) break;
    }
    // no measurable progress: we are at the noise floor of f
    if (vn <= val && alpha < 1.0) {
      res.converged = res.grad_norm < std::sqrt(opts.grad_tol);
      break;
    }
    vn = f(xn, &gn, &Hn);
    mu = alpha == 1.0 ? mu * 0.1 : std::max(mu, 1e-10);
    if (mu < 1e-12) mu = 0.0;
    res.x = xn;
    val = vn;
    g = gn;
    H = Hn;
    res.iterations = it + 1;
  }
  res.grad_norm = g.norm();
  if (res.grad_norm < opts.grad_tol) res.converged = true;
  res.value = val;
  return res;
}

Objective finite_difference(std::function<double(const Eigen::VectorXd&)> f, double step) {
  return [f = std::move(f), step](const Eigen::VectorXd& x, Eigen::VectorXd* grad,
                                  Eigen::MatrixXd* hess) -> double {
    const double f0 = f(x);
    if (!std::isfinite(f0) || (!grad && !hess)) return f0;
    const Eigen::Index n = x.size();
    Eigen::VectorXd h(n);
    for (Eigen::Index i = 0; i < n; ++i) h[i] = step * std::max(1.0, std::abs(x[i]));
    Eigen::VectorXd fp(n), fm(n);
    Eigen::VectorXd xp = x;
    for (Eigen::Index i = 0; i < n; ++i) {
      xp[i] = x[i] + h[i];
      fp[i] = f(xp);
      xp[i] = x[i] - h[i];
      fm[i] = f(xp);
      xp[i] = x[i];
      if (!std::isfinite(fp[i]) || !std::isfinite(fm[i])) return -std::numeric_limits<double>::infinity();
    }
    if (grad) *grad = (fp - fm).cwiseQuotient(2.0 * h);
    if (hess) {
      hess->resize(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        (*hess)(i, i) = (fp[i] - 2.0 * f0 + fm[i]) / (h[i] * h[i]);
        for (Eigen::Index j = i + 1; j < n; ++j) {
          Eigen::VectorXd y = x;
          double acc = 0.0;
          for (int si : {1, -1})
            for (int sj : {1, -1}) {
              y[i] = x[i] + si * h[i];
              y[j] = x[j] + sj * h[j];
              acc += si * sj * f(y);
            }
          (*hess)(i, j) = (*hess)(j, i) = acc / (4.0 * h[i] * h[j]);
        }
      }
    }
    return f0;
  };
}

double richardson_derivative(const std::function<double(double)>& f, double x, double h) {
  const double d1 = (f(x + h) - f(x - h)) / (2.0 * h);
  const double h2 = 0.5 * h;
  const double d2 = (f(x + h2) - f(x - h2)) / (2.0 * h2);
  return (4.0 * d2 - d1) / 3.0;
}

}  // namespace fluctruin::opt
