#include "fluctruin/population_action.hpp"

#include "fluctruin/optimize.hpp"
#include "fluctruin/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fluctruin {

PopulationAction::PopulationAction(const ModelParams& p, std::vector<double> times, int order)
    : p_(&p), t_(std::move(times)) {
  if (t_.size() < 2 || t_.front() != 0.0)
    throw std::invalid_argument("PopulationAction: grid must start at 0 and have >= 2 nodes");
  for (std::size_t i = 1; i < t_.size(); ++i)
    if (!(t_[i] > t_[i - 1])) throw std::invalid_argument("PopulationAction: grid must increase");
  d_ = t_.size() - 1;
  const double T = t_.back();

  M_ = Eigen::MatrixXd::Zero(d_, d_);
  for (std::size_t j = 1; j < d_; ++j) {
    if (j >= 2) M_(j - 1, j - 2) = 0.5;
    M_(j - 1, j) = -0.5;
  }
  M_(d_ - 1, d_ - 1) = 0.5;
  if (d_ >= 2) M_(d_ - 1, d_ - 2) = 0.5;

  const quad::RuleOptions opts{.order = order, .max_panel = 0.5};
  const auto kink_rule = [&](double a, double b, std::vector<double> extra, bool graded) {
    for (double tj : t_) extra.push_back(tj);
    quad::RuleOptions o = opts;
    o.graded_left = graded;
    return quad::composite_gauss(a, b, extra, o);
  };

  if (p.f0 > 0.0) {
    const Distribution& res = p.residual;
    quad::Rule rule = kink_rule(0.0, std::min(T, res.support_upper()), res.breakpoints(), res.singular_at_zero());
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double w = rule.weights[i] * res.density(rule.nodes[i]);
      if (w == 0.0) continue;
      Term term{w, 0, {}, {}};
      add_hat(term, rule.nodes[i], 1.0);
      minus_.push_back(term);
    }
    Term tail{res.tail(T), 0, {}, {}};
    add_hat(tail, T, 1.0);
    if (tail.w > 0.0) minus_.push_back(tail);
  }

  if (p.lambda > 0.0) {
    const Distribution& h = p.sojourn;
    std::vector<double> outer_bps;
    for (double b : h.breakpoints())
      if (T - b > 0.0) outer_bps.push_back(T - b);
    const quad::Rule outer = kink_rule(0.0, T, outer_bps, false);
    for (std::size_t i = 0; i < outer.size(); ++i) {
      const double s = outer.nodes[i], ws = outer.weights[i];
      // departures before T: x = r - s in (0, T - s]
      if (h.is_atomic()) {
        const double v = h.parameters()[0];
        if (v <= T - s) {
          Term term{ws, 0, {}, {}};
          add_hat(term, s + v, 1.0);
          add_hat(term, s, -1.0);
          plus_.push_back(term);
        }
      } else {
        std::vector<double> bps = h.breakpoints();
        for (double tj : t_)
          if (tj - s > 0.0) bps.push_back(tj - s);
        quad::RuleOptions o = opts;
        o.graded_left = h.singular_at_zero();
        const quad::Rule inner = quad::composite_gauss(0.0, std::min(T - s, h.support_upper()), bps, o);
        for (std::size_t q = 0; q < inner.size(); ++q) {
          const double x = inner.nodes[q];
          const double w = ws * inner.weights[q] * h.density(x);
          if (w == 0.0) continue;
          Term term{w, 0, {}, {}};
          add_hat(term, s + x, 1.0);
          add_hat(term, s, -1.0);
          plus_.push_back(term);
        }
      }
      // still present at T
      const double wt = ws * h.tail(T - s);
      if (wt > 0.0) {
        Term term{wt, 0, {}, {}};
        add_hat(term, T, 1.0);
        add_hat(term, s, -1.0);
        plus_.push_back(term);
      }
    }
  }
}

void PopulationAction::add_hat(Term& term, double x, double sign) const {
  const auto it = std::upper_bound(t_.begin(), t_.end(), x);
  std::size_t j = static_cast<std::size_t>(it - t_.begin());
  j = std::clamp<std::size_t>(j, 1, d_);
  const double a = t_[j - 1], b = t_[j];
  const double alpha = std::clamp((x - a) / (b - a), 0.0, 1.0);
  const auto push = [&](std::size_t node, double c) {
    if (node == 0 || c == 0.0) return;
    term.idx[term.n] = static_cast<int>(node - 1);
    term.c[term.n] = c;
    ++term.n;
  };
  push(j - 1, sign * (1.0 - alpha));
  push(j, sign * alpha);
}

Eigen::VectorXd PopulationAction::linear_term(const std::vector<double>& f) const {
  if (f.size() != d_ + 1) throw std::invalid_argument("PopulationAction: path length mismatch");
  Eigen::VectorXd ell(d_);
  for (std::size_t j = 1; j < d_; ++j) ell[j - 1] = -0.5 * (f[j + 1] - f[j - 1]);
  ell[d_ - 1] = 0.5 * (f[d_] + f[d_ - 1]);
  return ell;
}

double PopulationAction::sum_terms(const std::vector<Term>& terms, const Eigen::VectorXd& y,
                                   Eigen::VectorXd* grad, Eigen::MatrixXd* hess) const {
  thread_local std::vector<double> expo, weights, vals;
  const std::size_t n = terms.size();
  expo.resize(n);
  weights.resize(n);
  vals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Term& tm = terms[i];
    double e = 0.0;
    for (int a = 0; a < tm.n; ++a) e += tm.c[a] * y[tm.idx[a]];
    expo[i] = e;
    weights[i] = tm.w;
  }
  simd::weighted_exp(weights, expo, vals);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = vals[i];
    acc += v;
    if (!grad && !hess) continue;
    const Term& tm = terms[i];
    for (int a = 0; a < tm.n; ++a) {
      const double va = v * tm.c[a];
      if (grad) (*grad)[tm.idx[a]] += va;
      if (hess)
        for (int b = 0; b < tm.n; ++b) (*hess)(tm.idx[a], tm.idx[b]) += va * tm.c[b];
    }
  }
  return acc;
}

double PopulationAction::cumulant(const Eigen::VectorXd& y, Eigen::VectorXd* grad, Eigen::MatrixXd* hess) const {
  const ModelParams& p = *p_;
  const auto n = static_cast<Eigen::Index>(d_);
  if (grad) grad->setZero(n);
  if (hess) hess->setZero(n, n);
  double value = 0.0;
  if (!minus_.empty()) {
    Eigen::VectorXd gs = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd hs = Eigen::MatrixXd::Zero(hess ? n : 0, hess ? n : 0);
    const double S = sum_terms(minus_, y, grad || hess ? &gs : nullptr, hess ? &hs : nullptr);
    if (!(S > 0.0) || !std::isfinite(S)) return std::numeric_limits<double>::infinity();
    value += p.f0 * std::log(S);
    if (grad) *grad += p.f0 * gs / S;
    if (hess) *hess += p.f0 * (hs / S - gs * gs.transpose() / (S * S));
  }
  if (!plus_.empty()) {
    Eigen::VectorXd gp = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd hp = Eigen::MatrixXd::Zero(hess ? n : 0, hess ? n : 0);
    const double C = sum_terms(plus_, y, grad ? &gp : nullptr, hess ? &hp : nullptr);
    if (!std::isfinite(C)) return std::numeric_limits<double>::infinity();
    value += p.lambda * (C - t_.back());
    if (grad) *grad += p.lambda * gp;
    if (hess) *hess += p.lambda * hp;
  }
  return value;
}

PopulationAction::Solution PopulationAction::conjugate(const Eigen::VectorXd& ell, const Eigen::VectorXd* warm) const {
  const auto n = static_cast<Eigen::Index>(d_);
  const opt::Objective obj = [&](const Eigen::VectorXd& y, Eigen::VectorXd* g, Eigen::MatrixXd* H) {
    const double lam = cumulant(y, g, H);
    if (!std::isfinite(lam)) return -std::numeric_limits<double>::infinity();
    if (g) *g = ell - *g;
    if (H) *H = -*H;
    return ell.dot(y) - lam;
  };
  const Eigen::VectorXd y0 = (warm && warm->size() == n) ? *warm : Eigen::VectorXd::Zero(n);
  const opt::NewtonResult nr = opt::maximize_concave(obj, y0, {.grad_tol = 1e-10, .max_iterations = 200, .norm_cap = 1e3});
  Solution sol;
  sol.y = nr.x;
  sol.iterations = nr.iterations;
  sol.grad_norm = nr.grad_norm;
  sol.infinite = nr.unbounded;
  sol.converged = nr.converged || nr.grad_norm < 1e-7;
  sol.value = nr.value;
  if (!sol.infinite) {
    Eigen::VectorXd g;
    cumulant(sol.y, &g, &sol.hess);
  }
  return sol;
}

}  // namespace fluctruin
