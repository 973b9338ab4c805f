#include "fluctruin/ratefn.hpp"

#include "fluctruin/optimize.hpp"
#include "fluctruin/population_action.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <stdexcept>

namespace fluctruin {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

RateResult from_newton(const opt::NewtonResult& nr, std::size_t d) {
  RateResult r;
  r.iterations = nr.iterations;
  r.grad_norm = nr.grad_norm;
  r.converged = nr.converged;
  r.infinite = nr.unbounded;
  r.value = nr.unbounded ? kInf : nr.value;
  r.omega.assign(nr.x.data(), nr.x.data() + d);
  r.theta.assign(nr.x.data() + d, nr.x.data() + 2 * d);
  return r;
}

// Solve F(theta) = target for increasing F on (-inf, cap). Returns nullopt
// when target is at or above sup F (non-steep case).
template <class F>
std::optional<double> solve_increasing(F&& fn, double target, double cap) {
  double lo = -1.0;
  for (int i = 0; fn(lo) > target; ++i) {
    lo *= 2.0;
    if (i > 1100) return std::nullopt;
  }
  double hi = std::isfinite(cap) ? std::min(1.0, 0.5 * cap) : 1.0;
  if (hi <= lo) hi = lo + 1.0;
  for (int i = 0; fn(hi) < target; ++i) {
    lo = hi;
    hi = std::isfinite(cap) ? hi + 0.5 * (cap - hi) : 2.0 * hi;
    if (i > 1100 || (std::isfinite(cap) && cap - hi < 1e-15 * (1.0 + cap))) return std::nullopt;
  }
  std::uintmax_t iters = 200;
  const auto res = boost::math::tools::toms748_solve([&](double th) { return fn(th) - target; }, lo, hi,
                                                     boost::math::tools::eps_tolerance<double>(50), iters);
  return 0.5 * (res.first + res.second);
}

}  // namespace

PathGrid::PathGrid(std::vector<double> times, std::vector<double> fs, std::vector<double> gs)
    : t(std::move(times)), f(std::move(fs)), g(std::move(gs)) {
  if (t.size() < 2 || t.front() != 0.0) throw std::invalid_argument("PathGrid: times must start at 0, >= 2 nodes");
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1])) throw std::invalid_argument("PathGrid: times must increase");
  if (f.size() != t.size()) throw std::invalid_argument("PathGrid: f length mismatch");
  if (!g.empty() && g.size() != t.size()) throw std::invalid_argument("PathGrid: g length mismatch");
  for (double v : f)
    if (!(v >= 0.0)) throw std::invalid_argument("PathGrid: f must be >= 0");
}

namespace {
std::vector<double> differentiate(const std::vector<double>& t, const std::vector<double>& v) {
  const std::size_t n = t.size();
  std::vector<double> out(n, 0.0);
  if (v.size() != n) return out;
  out[0] = (v[1] - v[0]) / (t[1] - t[0]);
  out[n - 1] = (v[n - 1] - v[n - 2]) / (t[n - 1] - t[n - 2]);
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (v[i + 1] - v[i - 1]) / (t[i + 1] - t[i - 1]);
  return out;
}
}  // namespace

std::vector<double> PathGrid::f_prime() const { return differentiate(t, f); }
std::vector<double> PathGrid::g_prime() const { return differentiate(t, g); }

std::vector<double> PathGrid::uniform_times(double T, std::size_t intervals) {
  std::vector<double> out(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) out[i] = T * static_cast<double>(i) / static_cast<double>(intervals);
  out.back() = T;
  return out;
}

RateResult rate_one_point(const ModelParams& p, double t, double f, double g) {
  if (!(t > 0.0)) throw std::invalid_argument("rate_one_point: t must be > 0");
  if (!(f >= 0.0)) throw std::invalid_argument("rate_one_point: f must be >= 0");
  const OnePointCumulant cum(p, t);
  const opt::Objective obj = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad, Eigen::MatrixXd* hess) {
    const auto ev = cum.eval(x[0], x[1]);
    if (!ev.finite()) return -kInf;
    if (grad) *grad = Eigen::Vector2d(f, g) - ev.grad;
    if (hess) *hess = -ev.hess;
    return x[0] * f + x[1] * g - ev.value;
  };
  return from_newton(opt::maximize_concave(obj, Eigen::Vector2d::Zero()), 1);
}

RateResult rate_multi(const ModelParams& p, const TimeGrid& grid, const std::vector<double>& fs,
                      const std::vector<double>& gs) {
  const std::size_t d = grid.size();
  if (fs.size() != d || gs.size() != d) throw std::invalid_argument("rate_multi: target length mismatch");
  for (double v : fs)
    if (!(v >= 0.0)) throw std::invalid_argument("rate_multi: f must be >= 0");
  const auto value = [&](const Eigen::VectorXd& x) {
    DualVector duals(std::vector<double>(x.data(), x.data() + d), std::vector<double>(x.data() + d, x.data() + 2 * d));
    const double n = log_n(p, grid, duals);
    if (!std::isfinite(n)) return -kInf;
    double lin = 0.0;
    for (std::size_t k = 0; k < d; ++k) lin += x[k] * fs[k] + x[d + k] * gs[k];
    return lin - n;
  };
  const auto obj = opt::finite_difference(value, 1e-4);
  return from_newton(opt::maximize_concave(obj, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(2 * d))), d);
}

double k_local(const ModelParams& p, double x, double u, KVariant variant) {
  if (!(x >= 0.0)) throw std::invalid_argument("k_local: x must be >= 0");
  if (x == 0.0) return u == 0.0 ? 0.0 : kInf;
  if (variant == KVariant::LogPhi) return k_local_derivs(p, x, u).value;
  // literal variant: sup_theta (theta u - x phi(theta)); phi' increases from -inf
  const auto dphi = [&](double th) {
    const LogPhi lp = log_phi_derivs(p, th);
    return x * std::exp(lp.value) * lp.d1;
  };
  const auto th = solve_increasing(dphi, u, p.nu > 0.0 ? p.theta_cap() : kInf);
  if (!th) return kInf;
  return *th * u - x * phi(p, *th);
}

KLocal k_local_derivs(const ModelParams& p, double x, double u) {
  KLocal k;
  if (!(x >= 0.0)) throw std::invalid_argument("k_local: x must be >= 0");
  if (x == 0.0) {
    k.value = u == 0.0 ? 0.0 : kInf;
    return k;
  }
  const double floor_rate = -x * p.r;
  if (p.nu == 0.0) {
    k.value = u == floor_rate ? 0.0 : kInf;
    return k;
  }
  if (u < floor_rate) {
    k.value = kInf;
    return k;
  }
  if (u == floor_rate) {
    // theta -> -inf: no claims at all on the interval
    k.value = x * p.nu;
    k.theta = -kInf;
    return k;
  }
  // the local mean rate is hit exactly
  const auto th = u == x * (p.nu * p.claim_mean() - p.r)
                      ? std::optional<double>(0.0)
                      : solve_increasing([&](double t) { return x * log_phi_derivs(p, t).d1; }, u, p.theta_cap());
  if (!th) {
    k.value = kInf;
    return k;
  }
  const LogPhi lp = log_phi_derivs(p, *th);
  k.theta = *th;
  k.value = *th * u - x * lp.value;
  k.du = *th;
  k.dx = -lp.value;
  k.duu = 1.0 / (x * lp.d2);
  k.dux = -lp.d1 / (x * lp.d2);
  k.dxx = lp.d1 * lp.d1 / (x * lp.d2);
  return k;
}

RateResult rate_f(const ModelParams& p, const PathGrid& path) {
  const double tol = 1e-9 * std::max(1.0, p.f0);
  if (std::abs(path.f.front() - p.f0) > tol) throw std::invalid_argument("rate_f: f(0) must equal f0");
  const PopulationAction pa(p, path.t);
  const auto sol = pa.conjugate(pa.linear_term(path.f));
  RateResult r;
  r.value = sol.infinite ? kInf : sol.value;
  r.infinite = sol.infinite;
  r.converged = sol.converged;
  r.iterations = sol.iterations;
  r.grad_norm = sol.grad_norm;
  r.omega.assign(sol.y.data(), sol.y.data() + sol.y.size());
  return r;
}

double rate_g_given_f(const ModelParams& p, const PathGrid& path) {
  if (path.g.size() != path.t.size()) throw std::invalid_argument("rate_g_given_f: path has no g values");
  if (path.g.front() != 0.0) throw std::invalid_argument("rate_g_given_f: g(0) must be 0");
  double acc = 0.0;
  for (std::size_t i = 1; i < path.t.size(); ++i) {
    const double dt = path.t[i] - path.t[i - 1];
    const double x = 0.5 * (path.f[i - 1] + path.f[i]);
    const double u = (path.g[i] - path.g[i - 1]) / dt;
    const double k = k_local(p, x, u);
    if (!std::isfinite(k)) return kInf;
    acc += dt * k;
  }
  return acc;
}

RateResult rate_sample_path(const ModelParams& p, const PathGrid& path) {
  RateResult r = rate_f(p, path);
  const double kg = rate_g_given_f(p, path);
  r.value += kg;
  if (!std::isfinite(r.value)) {
    r.value = kInf;
    r.infinite = true;
  }
  return r;
}

}  // namespace fluctruin
