#include "fluctruin/verify.hpp"

#include "fluctruin/pathsolver.hpp"
#include "fluctruin/simulate.hpp"

#include <chrono>
#include <cmath>
#include <random>

namespace fluctruin {
namespace {

template <class F>
Check timed(const std::string& name, F&& body) {
  const auto start = std::chrono::steady_clock::now();
  Check c;
  c.name = name;
  try {
    body(c);
  } catch (const std::exception& ex) {
    c.passed = false;
    c.detail = std::string("exception: ") + ex.what();
  }
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return c;
}

double theta_hi(const ModelParams& p) {
  return std::isfinite(p.theta_max()) ? 0.8 * p.theta_max() : 1.0;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

double path_rel(const PathGrid& a, const PathGrid& b) {
  double df = 0, dg = 0, sf = 0, sg = 0;
  for (std::size_t i = 0; i < a.t.size(); ++i) {
    df = std::max(df, std::abs(a.f[i] - b.f[i]));
    dg = std::max(dg, std::abs(a.g[i] - b.g[i]));
    sf = std::max(sf, std::abs(b.f[i]));
    sg = std::max(sg, std::abs(b.g[i]));
  }
  return std::max(df / std::max(sf, 1e-12), dg / std::max(sg, 1e-12));
}

}  // namespace

std::vector<Check> run_property_suite(const ModelParams& p, const VerifyOptions& opts) {
  std::vector<Check> out;
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);

  out.push_back(timed("mgf_normalization", [&](Check& c) {
    double worst = 0.0;
    for (double t : {0.3, 1.0, 2.5, 5.0}) {
      worst = std::max(worst, std::abs(m_minus_one(p, t, 0.0, 0.0) - 1.0));
      worst = std::max(worst, std::abs(m_plus_one(p, t, 0.0, 0.0) - 1.0));
      const TimeGrid grid({0.3 * t, 0.7 * t, t});
      worst = std::max(worst, std::abs(m_minus_multi(p, grid, DualVector::zeros(3)) - 1.0));
      worst = std::max(worst, std::abs(m_plus_multi(p, grid, DualVector::zeros(3)) - 1.0));
      const auto zero = DualFunction::sample(t, 16, [](double) { return 0.0; }, [](double) { return 0.0; });
      worst = std::max(worst, std::abs(m_minus_limit(p, zero) - 1.0));
      worst = std::max(worst, std::abs(m_plus_limit(p, zero) - 1.0));
    }
    c.value = worst;
    c.tolerance = 1e-12;
    c.passed = worst <= c.tolerance;
  }));

  out.push_back(timed("d1_equivalence", [&](Check& c) {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double t = 0.1 + 4.9 * U(rng);
      const double w = -1.0 + 2.0 * U(rng);
      const double th = -1.0 + (theta_hi(p) + 1.0) * U(rng);
      const TimeGrid grid({t});
      const DualVector duals({w}, {th});
      worst = std::max(worst, rel(m_minus_multi(p, grid, duals), m_minus_one(p, t, w, th)));
      worst = std::max(worst, rel(log_m_plus_multi(p, grid, duals), log_m_plus_one(p, t, w, th)));
    }
    c.value = worst;
    c.tolerance = 1e-10;
    c.passed = worst <= c.tolerance;
  }));

  out.push_back(timed("rate_multi_d1", [&](Check& c) {
    double worst = 0.0;
    for (double t : {0.5, 2.0, 4.0}) {
      const double f = fluid_population(p, t) * (0.8 + 0.4 * U(rng));
      const double g = fluid_claims(p, t) + (-0.5 + U(rng));
      const double a = rate_one_point(p, t, f, g).value;
      const double b = rate_multi(p, TimeGrid({t}), {f}, {g}).value;
      worst = std::max(worst, std::abs(a - b));
    }
    c.value = worst;
    c.tolerance = 1e-8;
    c.passed = worst <= c.tolerance;
  }));

  out.push_back(timed("fluid_zero_rate", [&](Check& c) {
    double worst = 0.0;
    for (double t : {0.5, 1.0, 2.5, 5.0})
      worst = std::max(worst, std::abs(rate_one_point(p, t, fluid_population(p, t), fluid_claims(p, t)).value));
    const std::vector<double> ts = {1.0, 2.0, 3.0};
    std::vector<double> fs, gs;
    for (double t : ts) {
      fs.push_back(fluid_population(p, t));
      gs.push_back(fluid_claims(p, t));
    }
    worst = std::max(worst, std::abs(rate_multi(p, TimeGrid(ts), fs, gs).value));
    c.value = worst;
    c.tolerance = 1e-6;
    c.passed = worst <= c.tolerance;
  }));

  out.push_back(timed("k_local_zero_at_mean", [&](Check& c) {
    double worst = 0.0;
    bool positive = true;
    const double drift = p.nu * p.claim_mean() - p.r;
    for (double x : {0.25, 1.0, 3.0}) {
      worst = std::max(worst, std::abs(k_local(p, x, drift * x)));
      positive = positive && k_local(p, x, drift * x + 0.1) > 0.0 && k_local(p, x, drift * x - 0.1) > 0.0;
    }
    c.value = worst;
    c.tolerance = 1e-12;
    c.passed = worst <= c.tolerance && positive;
    if (!positive) c.detail = "k_local not positive off the mean";
  }));

  out.push_back(timed("convexity_midpoint", [&](Check& c) {
    double worst = 0.0;  // max of I(mid) - average, should be <= 0
    for (int i = 0; i < 20; ++i) {
      const double t = 0.5 + 4.0 * U(rng);
      const double f1 = fluid_population(p, t) * (0.5 + U(rng)), f2 = fluid_population(p, t) * (0.5 + U(rng));
      const double g1 = fluid_claims(p, t) + 2.0 * (U(rng) - 0.5), g2 = fluid_claims(p, t) + 2.0 * (U(rng) - 0.5);
      const double a = rate_one_point(p, t, f1, g1).value, b = rate_one_point(p, t, f2, g2).value;
      const double m = rate_one_point(p, t, 0.5 * (f1 + f2), 0.5 * (g1 + g2)).value;
      worst = std::max(worst, m - 0.5 * (a + b));
      const double x = 0.2 + 2.0 * U(rng);
      const double u1 = -p.r * x * 0.9 + 3.0 * U(rng), u2 = -p.r * x * 0.9 + 3.0 * U(rng);
      worst = std::max(worst, k_local(p, x, 0.5 * (u1 + u2)) - 0.5 * (k_local(p, x, u1) + k_local(p, x, u2)));
      const double w1 = U(rng) - 0.5, w2 = U(rng) - 0.5;
      const double th1 = theta_hi(p) * (U(rng) - 0.5), th2 = theta_hi(p) * (U(rng) - 0.5);
      const OnePointCumulant N(p, t);
      worst = std::max(worst, N.value(0.5 * (w1 + w2), 0.5 * (th1 + th2)) - 0.5 * (N.value(w1, th1) + N.value(w2, th2)));
    }
    c.value = worst;
    c.tolerance = 1e-9;
    c.passed = worst <= c.tolerance;
  }));

  out.push_back(timed("two_solver_agreement", [&](Check& c) {
    const DecayResult dr = decay_rate(p, opts.u, opts.T);
    RuinQuery q;
    q.level = opts.u;
    q.T = dr.t_star;
    q.intervals = opts.intervals;
    const MostLikelyPath a = most_likely_path(p, q);
    const MostLikelyPath b = most_likely_path_variational(p, q, &a.path);
    const double dv = std::abs(b.rate - a.rate) / a.rate;
    const double dp = path_rel(b.path, a.path);
    c.value = std::max(dv / 0.02, dp / 0.05);
    c.tolerance = 1.0;
    c.passed = dv <= 0.02 && dp <= 0.05 && b.converged;
    c.detail = "rate " + std::to_string(a.rate) + " vs " + std::to_string(b.rate) + ", path deviation " +
               std::to_string(dp);
  }));

  out.push_back(timed("simulator_conservation", [&](Check& c) {
    SimConfig cfg;
    cfg.n = 20;
    cfg.T = opts.T;
    cfg.seed = opts.seed;
    cfg.record_grid = {0.0, 0.5 * opts.T, opts.T};
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 200; ++i) worst = std::max(worst, sample_trajectory(p, cfg, i, opts.u).conservation_error);
    c.value = worst;
    c.tolerance = 1e-9;
    c.passed = worst <= c.tolerance;
  }));

  out.push_back(timed("equilibrium_occupancy", [&](Check& c) {
    // stationary start for the same sojourn law
    const ModelParams eq(p.lambda, p.lambda * p.sojourn.mean(), p.nu, p.r, p.claim, p.sojourn);
    SimConfig cfg;
    cfg.n = 20;
    cfg.T = opts.T;
    cfg.replications = 20000;
    cfg.seed = opts.seed;
    cfg.jobs = opts.jobs;
    const ChiSquare cs = occupancy_chi_square(eq, cfg, opts.T);
    c.value = cs.p_value;
    c.tolerance = 0.01;
    c.passed = cs.p_value > c.tolerance;
    c.detail = "chi2 " + std::to_string(cs.statistic) + " on " + std::to_string(cs.dof) + " dof";
  }));

  if (opts.monte_carlo) {
    out.push_back(timed("mc_vs_ldp", [&](Check& c) {
      const double rho = decay_rate(p, opts.mc_u, opts.mc_T).rho;
      const EmpiricalDecay ed =
          empirical_decay(p, opts.mc_u, opts.mc_T, opts.mc_n, opts.mc_replications, opts.seed, opts.jobs);
      c.value = std::abs(ed.slope - rho) / rho;
      c.tolerance = 0.25;
      c.passed = std::isfinite(ed.slope) && c.value <= c.tolerance;
      c.detail = "slope " + std::to_string(ed.slope) + " vs rate " + std::to_string(rho);
    }));
  }
  return out;
}

nlohmann::json report_json(const std::vector<Check>& checks) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks)
    arr.push_back({{"name", c.name},
                   {"passed", c.passed},
                   {"value", c.value},
                   {"tolerance", c.tolerance},
                   {"detail", c.detail},
                   {"seconds", c.seconds}});
  return {{"passed", all_passed(checks)}, {"checks", arr}};
}

bool all_passed(const std::vector<Check>& checks) {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

}  // namespace fluctruin
