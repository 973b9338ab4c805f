#include "fluctruin/pathsolver.hpp"

#include "fluctruin/optimize.hpp"
#include "fluctruin/population_action.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <stdexcept>

namespace fluctruin {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

RateResult infinite_rate() {
  RateResult r;
  r.value = kInf;
  r.infinite = true;
  r.omega = {0.0};
  r.theta = {0.0};
  return r;
}

}  // namespace

void RuinQuery::validate() const {
  if (!(T > 0.0)) throw std::invalid_argument("RuinQuery: T must be > 0");
  if (target == Target::HalfLine && !(level > 0.0)) throw std::invalid_argument("RuinQuery: u must be > 0");
  if (intervals < 2) throw std::invalid_argument("RuinQuery: need at least 2 grid intervals");
  if (scan_points < 4) throw std::invalid_argument("RuinQuery: scan resolution too small");
}

RateResult terminal_rate(const ModelParams& p, double t, double a) {
  if (!(t > 0.0)) throw std::invalid_argument("terminal_rate: t must be > 0");
  const OnePointCumulant cum(p, t);
  const double gbar = fluid_claims(p, t);
  RateResult res;
  res.omega = {0.0};
  res.theta = {0.0};
  res.converged = true;
  if (a == gbar) return res;

  // dN/dtheta at omega = 0, increasing in theta; +inf past the abscissa
  const auto slope = [&](double th) {
    const auto ev = cum.eval(0.0, th);
    return ev.finite() && std::isfinite(ev.grad[1]) ? ev.grad[1] : 1e300;
  };
  const double cap = p.nu > 0.0 ? p.theta_cap() : kInf;
  double lo, hi;
  if (a > gbar) {
    lo = 0.0;
    hi = std::isfinite(cap) ? std::min(1.0, 0.5 * cap) : 1.0;
    while (slope(hi) < a) {
      lo = hi;
      hi = std::isfinite(cap) ? hi + 0.5 * (cap - hi) : 2.0 * hi;
      if (hi > 1e4 || (std::isfinite(cap) && cap - hi < 1e-14 * (1.0 + cap))) return infinite_rate();
    }
  } else {
    hi = 0.0;
    lo = -1.0;
    while (slope(lo) > a) {
      hi = lo;
      lo *= 2.0;
      if (lo < -1e4) return infinite_rate();
    }
  }
  std::uintmax_t iters = 200;
  const auto br = boost::math::tools::toms748_solve([&](double th) { return slope(th) - a; }, lo, hi,
                                                    boost::math::tools::eps_tolerance<double>(52), iters);
  const double th = 0.5 * (br.first + br.second);
  const auto ev = cum.eval(0.0, th);
  res.theta = {th};
  res.value = std::max(0.0, th * a - ev.value);
  res.iterations = static_cast<int>(iters);
  res.grad_norm = std::abs(ev.grad[1] - a);
  res.converged = iters < 200;
  return res;
}

RateResult decay_at_horizon(const ModelParams& p, double u, double t) {
  if (!(u > 0.0)) throw std::invalid_argument("decay_at_horizon: u must be > 0");
  if (!(t > 0.0)) throw std::invalid_argument("decay_at_horizon: t must be > 0");
  if (u <= fluid_claims(p, t)) {
    RateResult r;
    r.omega = {0.0};
    r.theta = {0.0};
    r.converged = true;
    return r;
  }
  return terminal_rate(p, t, u);
}

DecayResult decay_rate(const ModelParams& p, double u, double T, std::size_t scan_points) {
  if (!(u > 0.0)) throw std::invalid_argument("decay_rate: u must be > 0");
  if (!(T > 0.0)) throw std::invalid_argument("decay_rate: T must be > 0");
  if (scan_points < 4) throw std::invalid_argument("decay_rate: scan_points must be >= 4");
  DecayResult out;
  const auto rho = [&](double t) { return decay_at_horizon(p, u, t).value; };
  std::size_t best = 0;
  const auto visit = [&](double t) {
    out.t.push_back(t);
    out.rate.push_back(rho(t));
    if (out.rate.back() < out.rate[best]) best = out.t.size() - 1;  // strict: ties keep the earlier t
  };
  bool scanned = true;
  if (std::isfinite(T)) {
    for (std::size_t i = 1; i <= scan_points; ++i) visit(T * static_cast<double>(i) / static_cast<double>(scan_points));
  } else {
    int rising = 0;
    scanned = false;
    for (double t = 0.01; t < 1e4; t *= 1.05) {
      visit(t);
      const std::size_t n = out.t.size();
      rising = n > 1 && out.rate[n - 1] > out.rate[n - 2] ? rising + 1 : 0;
      if (rising >= 8 && t > 5.0 * out.t[best]) {
        scanned = true;
        break;
      }
    }
  }
  const double a = best == 0 ? 0.5 * out.t[0] : out.t[best - 1];
  const double b = best + 1 < out.t.size() ? out.t[best + 1] : out.t[best];
  out.rho = out.rate[best];
  out.t_star = out.t[best];
  if (b > a && std::isfinite(out.rho)) {
    const auto gs = opt::golden_section_min(rho, a, b, 1e-4);
    if (gs.value < out.rho) {
      out.rho = gs.value;
      out.t_star = gs.x;
    }
  }
  out.converged = scanned && std::isfinite(out.rho);
  return out;
}

MostLikelyPath most_likely_path(const ModelParams& p, const RuinQuery& query) {
  query.validate();
  if (!std::isfinite(query.T)) throw std::invalid_argument("most_likely_path: T must be finite");
  const double T = query.T;
  const RateResult rr = query.target == RuinQuery::Target::HalfLine ? decay_at_horizon(p, query.level, T)
                                                                    : terminal_rate(p, T, query.level);
  MostLikelyPath out;
  out.rate = rr.value;
  out.converged = rr.converged && !rr.infinite;
  if (rr.infinite) throw std::domain_error("most_likely_path: terminal level unreachable");
  const double th = rr.theta.at(0);
  out.theta_star = th;

  const auto times = PathGrid::uniform_times(T, query.intervals);
  std::vector<double> f(times.size()), g(times.size());
  f[0] = p.f0;
  g[0] = 0.0;
  const auto end = OnePointCumulant(p, T).eval(0.0, th);
  f.back() = end.grad[0];
  g.back() = end.grad[1];
  constexpr double h = 1e-3;
  for (std::size_t i = 1; i + 1 < times.size(); ++i) {
    const TimeGrid tg({times[i], T});
    const auto dw = [&](double x) { return log_n(p, tg, DualVector({x, 0.0}, {0.0, th})); };
    const auto dth = [&](double x) { return log_n(p, tg, DualVector({0.0, 0.0}, {x, th})); };
    f[i] = opt::richardson_derivative(dw, 0.0, h);
    g[i] = opt::richardson_derivative(dth, 0.0, h);
    if (!std::isfinite(f[i]) || !std::isfinite(g[i])) {
      out.failed_nodes.push_back(i);
      f[i] = 0.5 * (f[i - 1] + p.f0);  // placeholder, flagged
      g[i] = 0.0;
    } else if (f[i] < 0.0) {
      f[i] = 0.0;  // rounding below the boundary
    }
  }
  out.path = PathGrid(times, std::move(f), std::move(g));
  if (!out.failed_nodes.empty()) out.converged = false;
  return out;
}

namespace {

// J(f, g) = V(f) + I(g | f) on a fixed grid, with gradient and Hessian in
// z = (f_1..f_d, g_1..g_d). With nu = 0 only the f block is used.
class PathAction {
 public:
  PathAction(const ModelParams& p, std::vector<double> times)
      : p_(p), t_(std::move(times)), d_(t_.size() - 1), pa_(p, t_) {}

  std::size_t d() const noexcept { return d_; }
  bool claims() const noexcept { return p_.nu > 0.0; }
  std::size_t dim() const noexcept { return claims() ? 2 * d_ : d_; }

  double eval(const Eigen::VectorXd& z, Eigen::VectorXd* grad, Eigen::MatrixXd* hess) {
    std::vector<double> f(d_ + 1), g(d_ + 1, 0.0);
    f[0] = p_.f0;
    for (std::size_t j = 1; j <= d_; ++j) {
      f[j] = z[j - 1];
      if (!(f[j] >= 0.0)) return kInf;
      if (claims()) g[j] = z[d_ + j - 1];
    }
    const Eigen::VectorXd ell = pa_.linear_term(f);
    const auto sol = pa_.conjugate(ell, warm_.size() ? &warm_ : nullptr);
    if (sol.infinite || !std::isfinite(sol.value)) return kInf;
    warm_ = sol.y;
    double J = sol.value;
    const Eigen::Index n = static_cast<Eigen::Index>(dim());
    const auto& M = pa_.linear_map();
    if (grad) {
      grad->setZero(n);
      grad->head(d_) = M.transpose() * sol.y;
    }
    if (hess) {
      hess->setZero(n, n);
      hess->topLeftCorner(d_, d_) = M.transpose() * sol.hess.ldlt().solve(M);
    }
    if (!claims()) return J;
    for (std::size_t i = 1; i <= d_; ++i) {
      const double dt = t_[i] - t_[i - 1];
      const double x = 0.5 * (f[i - 1] + f[i]);
      const double u = (g[i] - g[i - 1]) / dt;
      const KLocal k = k_local_derivs(p_, x, u);
      if (!k.finite() || !std::isfinite(k.theta)) return kInf;
      J += dt * k.value;
      // local variables: f_{i-1}, f_i, g_{i-1}, g_i
      const int idx[4] = {fi(i - 1), fi(i), gi(i - 1), gi(i)};
      const double dm[4] = {0.5, 0.5, 0.0, 0.0};
      const double du[4] = {0.0, 0.0, -1.0 / dt, 1.0 / dt};
      for (int a = 0; a < 4; ++a) {
        if (idx[a] < 0) continue;
        if (grad) (*grad)[idx[a]] += dt * (k.dx * dm[a] + k.du * du[a]);
        if (!hess) continue;
        for (int b = 0; b < 4; ++b) {
          if (idx[b] < 0) continue;
          (*hess)(idx[a], idx[b]) += dt * (k.dxx * dm[a] * dm[b] + k.dux * (dm[a] * du[b] + du[a] * dm[b]) +
                                           k.duu * du[a] * du[b]);
        }
      }
    }
    return J;
  }

  double terminal_theta(const std::vector<double>& f, const std::vector<double>& g) const {
    if (!claims()) return 0.0;
    const double dt = t_[d_] - t_[d_ - 1];
    return k_local_derivs(p_, 0.5 * (f[d_ - 1] + f[d_]), (g[d_] - g[d_ - 1]) / dt).theta;
  }

 private:
  int fi(std::size_t j) const { return j == 0 ? -1 : static_cast<int>(j - 1); }
  int gi(std::size_t j) const { return j == 0 ? -1 : static_cast<int>(d_ + j - 1); }

  const ModelParams& p_;
  std::vector<double> t_;
  std::size_t d_;
  PopulationAction pa_;
  Eigen::VectorXd warm_;
};

}  // namespace

MostLikelyPath most_likely_path_variational(const ModelParams& p, const RuinQuery& query, const PathGrid* seed,
                                            const VariationalOptions& opts) {
  query.validate();
  if (!std::isfinite(query.T)) throw std::invalid_argument("most_likely_path_variational: T must be finite");
  const double T = query.T;
  const double target = query.level;
  const auto times = PathGrid::uniform_times(T, query.intervals);
  const std::size_t d = query.intervals;
  PathAction act(p, times);
  const std::size_t nz = act.dim();

  // affine parametrisation z = A x + z0 carrying the terminal constraint
  Eigen::MatrixXd A;
  Eigen::VectorXd z0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nz));
  if (act.claims()) {
    A = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(nz), static_cast<Eigen::Index>(nz - 1));
    z0[static_cast<Eigen::Index>(nz - 1)] = target;
  } else {
    // g is slaved to f: -r * trapezoid(f) = target; eliminate f_d
    std::vector<double> c(d + 1, 0.0);
    for (std::size_t i = 1; i <= d; ++i) {
      const double dt = times[i] - times[i - 1];
      c[i - 1] += 0.5 * dt;
      c[i] += 0.5 * dt;
    }
    const double b = -target / p.r - c[0] * p.f0;
    A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d - 1));
    for (std::size_t j = 1; j < d; ++j) {
      A(static_cast<Eigen::Index>(j - 1), static_cast<Eigen::Index>(j - 1)) = 1.0;
      A(static_cast<Eigen::Index>(d - 1), static_cast<Eigen::Index>(j - 1)) = -c[j] / c[d];
    }
    z0[static_cast<Eigen::Index>(d - 1)] = b / c[d];
  }

  const opt::Objective obj = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad, Eigen::MatrixXd* hess) {
    const Eigen::VectorXd z = A * x + z0;
    Eigen::VectorXd gz;
    Eigen::MatrixXd hz;
    const double J = act.eval(z, grad ? &gz : nullptr, hess ? &hz : nullptr);
    if (!std::isfinite(J)) return -kInf;
    if (grad) *grad = -(A.transpose() * gz);
    if (hess) *hess = -(A.transpose() * hz * A);
    return -J;
  };

  // candidate starts as full (f, g) node vectors
  std::vector<std::pair<std::vector<double>, std::vector<double>>> starts;
  std::vector<double> fb(d + 1), gb(d + 1);
  for (std::size_t i = 0; i <= d; ++i) {
    fb[i] = fluid_population(p, times[i]);
    gb[i] = fluid_claims(p, times[i]);
  }
  fb[0] = p.f0;
  if (act.claims()) {
    std::vector<double> g1(d + 1), g2(d + 1), f2(d + 1);
    for (std::size_t i = 0; i <= d; ++i) {
      const double s = times[i] / T;
      g1[i] = gb[i] + (target - gb[d]) * s;
      g2[i] = target * s;
      f2[i] = p.f0 + (fb[d] - p.f0) * s;
    }
    starts.emplace_back(fb, g1);
    starts.emplace_back(f2, g2);
    if (seed && seed->t.size() == d + 1 && seed->g.size() == d + 1) {
      std::vector<double> fs = seed->f, gs = seed->g;
      for (double& v : fs) v = std::max(v, 1e-9);
      fs[0] = p.f0;
      gs[0] = 0.0;
      gs[d] = target;
      starts.emplace_back(fs, gs);
    }
  } else {
    std::vector<double> fs = fb;
    double num = 0.0;
    for (std::size_t i = 1; i <= d; ++i) num += 0.5 * (times[i] - times[i - 1]) * (fb[i - 1] + fb[i]);
    const double want = -target / p.r;
    const double kappa = num > 0.0 ? want / num : 1.0;
    for (std::size_t i = 1; i <= d; ++i) fs[i] = std::max(1e-9, kappa * fb[i]);
    starts.emplace_back(fs, std::vector<double>(d + 1, 0.0));
  }

  MostLikelyPath best;
  best.rate = kInf;
  opt::NewtonOptions nopt;
  nopt.grad_tol = opts.grad_tol;
  nopt.max_iterations = opts.max_iterations;
  nopt.norm_cap = 1e12;
  for (const auto& [fs, gs] : starts) {
    Eigen::VectorXd x0(A.cols());
    for (std::size_t j = 1; j < d + (act.claims() ? 1 : 0); ++j) x0[static_cast<Eigen::Index>(j - 1)] = fs[j];
    if (act.claims())
      for (std::size_t j = 1; j < d; ++j) x0[static_cast<Eigen::Index>(d + j - 1)] = gs[j];
    if (!std::isfinite(obj(x0, nullptr, nullptr))) continue;
    const auto nr = opt::maximize_concave(obj, x0, nopt);
    if (!std::isfinite(nr.value) || -nr.value >= best.rate) continue;
    const Eigen::VectorXd z = A * nr.x + z0;
    std::vector<double> f(d + 1), g(d + 1, 0.0);
    f[0] = p.f0;
    for (std::size_t j = 1; j <= d; ++j) {
      f[j] = std::max(0.0, z[static_cast<Eigen::Index>(j - 1)]);
      if (act.claims()) g[j] = z[static_cast<Eigen::Index>(d + j - 1)];
    }
    if (!act.claims())
      for (std::size_t j = 1; j <= d; ++j) g[j] = g[j - 1] - p.r * 0.5 * (times[j] - times[j - 1]) * (f[j - 1] + f[j]);
    best.rate = -nr.value;
    best.converged = nr.converged;
    best.theta_star = act.terminal_theta(f, g);
    best.path = PathGrid(times, std::move(f), std::move(g));
  }
  if (!std::isfinite(best.rate)) throw std::runtime_error("most_likely_path_variational: no feasible start");
  return best;
}

double path_distance(const PathGrid& a, const PathGrid& b) {
  if (a.t.size() != b.t.size()) throw std::invalid_argument("path_distance: grids differ");
  double m = 0.0;
  for (std::size_t i = 0; i < a.t.size(); ++i) {
    m = std::max(m, std::abs(a.f[i] - b.f[i]));
    if (!a.g.empty() && !b.g.empty()) m = std::max(m, std::abs(a.g[i] - b.g[i]));
  }
  return m;
}

}  // namespace fluctruin
