// fluctruin: decay rates, most likely paths, attribution, simulation and the
// property suite from a JSON config.
//
// Precedence: command-line flags > config file > built-in defaults.
// Exit codes: 0 ok, 1 usage/config error, 2 solver failure, 3 verification failure.

#include "fluctruin/attribution.hpp"
#include "fluctruin/config.hpp"
#include "fluctruin/io.hpp"
#include "fluctruin/pathsolver.hpp"
#include "fluctruin/simulate.hpp"
#include "fluctruin/verify.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>

using namespace fluctruin;
using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::string out = "out";
  bool dry_run = false;
  std::optional<unsigned> jobs;
  std::optional<std::size_t> intervals;
};

struct Failure {
  int code;
  std::string message;
};

std::string out_path(const Common& c, const std::string& name) { return (std::filesystem::path(c.out) / name).string(); }

double parse_horizon(const std::string& s) {
  if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size() || !(v > 0.0)) throw std::invalid_argument("bad horizon '" + s + "'");
  return v;
}

class Runner {
 public:
  Runner(const Common& c, std::string command) : common_(c), command_(std::move(command)), cfg_(load_config(c.config)) {
    if (c.jobs) cfg_.solver.jobs = *c.jobs;
    if (c.intervals) cfg_.solver.intervals = *c.intervals;
    start_ = std::chrono::steady_clock::now();
  }
  Config& cfg() { return cfg_; }

  // prints the plan and returns true when this is a dry run
  bool plan(const json& extra) {
    plan_ = {{"command", command_}, {"config", config_to_json(cfg_)}, {"arguments", extra}};
    if (!common_.dry_run) return false;
    std::cout << plan_.dump(2) << "\n";
    return true;
  }
  void csv(const std::string& name, const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
    io::write_csv(out_path(common_, name), header, rows);
    outputs_.push_back(name);
  }
  void write(const std::string& name, const json& j) {
    io::write_json(out_path(common_, name), j);
    outputs_.push_back(name);
  }
  void finish(std::uint64_t seed = 0) {
    io::RunManifest m;
    m.command = command_;
    m.config_path = common_.config;
    m.resolved = plan_;
    m.outputs = outputs_;
    m.seed = seed;
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    io::write_json(out_path(common_, "manifest.json"), io::to_json(m));
  }

 private:
  Common common_;
  std::string command_;
  Config cfg_;
  json plan_;
  std::vector<std::string> outputs_;
  std::chrono::steady_clock::time_point start_;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("-c,--config", c.config, "JSON config file")->required()->check(CLI::ExistingFile);
  sub->add_option("-o,--out", c.out, "output directory")->capture_default_str();
  sub->add_flag("--dry-run", c.dry_run, "print the resolved plan and exit");
  sub->add_option("-j,--jobs", c.jobs, "worker threads (overrides solver.jobs)");
  sub->add_option("-d,--intervals", c.intervals, "path grid intervals (overrides solver.intervals)");
}

int cmd_decay(const Common& common, double u, const std::string& horizon) {
  Runner run(common, "decay");
  const double T = parse_horizon(horizon);
  if (run.plan({{"u", u}, {"T", horizon}})) return 0;
  const DecayResult dr = decay_rate(run.cfg().model, u, T, run.cfg().solver.scan_points);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < dr.t.size(); ++i) rows.push_back({dr.t[i], dr.rate[i]});
  run.csv("decay_curve.csv", {"t", "rho"}, rows);
  const json horizon_json = std::isfinite(T) ? json(T) : json("inf");
  run.write("decay.json", {{"rho", dr.rho}, {"t_star", dr.t_star}, {"u", u}, {"T", horizon_json}, {"converged", dr.converged}});
  run.finish();
  std::cout << "rho " << io::format_double(dr.rho) << " t_star " << io::format_double(dr.t_star) << "\n";
  if (!dr.converged) throw Failure{2, "decay search did not converge"};
  return 0;
}

int cmd_path(const Common& common, double u, const std::vector<double>& Ts, const std::string& method) {
  Runner run(common, "path");
  if (run.plan({{"u", u}, {"T", Ts}, {"method", method}})) return 0;
  const ModelParams& p = run.cfg().model;
  std::vector<std::vector<double>> rates;
  json paths = json::array();
  bool ok = true;
  for (std::size_t k = 0; k < Ts.size(); ++k) {
    RuinQuery q;
    q.level = u;
    q.T = Ts[k];
    q.intervals = run.cfg().solver.intervals;
    MostLikelyPath mp = most_likely_path(p, q);
    if (method == "variational") mp = most_likely_path_variational(p, q, &mp.path);
    ok = ok && mp.converged;
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < mp.path.t.size(); ++i) {
      const double s = mp.path.t[i];
      rows.push_back({s, mp.path.f[i], mp.path.g[i], fluid_population(p, s), fluid_claims(p, s)});
    }
    const std::string name = "path_T" + std::to_string(k) + ".csv";
    run.csv(name, {"s", "f_star", "g_star", "f_bar", "g_bar"}, rows);
    rates.push_back({Ts[k], mp.rate, mp.theta_star});
    paths.push_back({{"T", Ts[k]}, {"file", name}, {"rate", mp.rate}, {"duals", {{"omega", mp.omega_star}, {"theta", mp.theta_star}}},
                     {"converged", mp.converged}});
  }
  run.csv("rates.csv", {"T", "rate", "theta_star"}, rates);
  const DecayResult dr = decay_rate(p, u, *std::max_element(Ts.begin(), Ts.end()), run.cfg().solver.scan_points);
  run.write("paths.json", {{"u", u}, {"paths", paths}, {"rho", dr.rho}, {"t_star", dr.t_star}});
  run.finish();
  if (!ok) throw Failure{2, "path recovery failed for at least one horizon"};
  return 0;
}

int cmd_attribute(const Common& common, double T, const std::vector<double>& a_list, const std::vector<double>& nus) {
  Runner run(common, "attribute");
  if (run.plan({{"T", T}, {"a", a_list}, {"nu", nus}})) return 0;
  const auto rows = attribution_sweep(run.cfg().model, a_list, nus, T, run.cfg().solver.jobs, run.cfg().solver.intervals);
  std::vector<std::vector<double>> table;
  bool ok = true;
  for (const auto& r : rows) {
    table.push_back({r.nu, r.a, r.e1, r.e1_limit});
    if (!r.ok) {
      ok = false;
      std::cerr << "warning: nu=" << r.nu << " a=" << r.a << ": " << r.error << "\n";
    }
  }
  run.csv("attribution.csv", {"nu", "a", "e1", "e1_limit"}, table);
  run.finish();
  return ok ? 0 : 2;
}

int cmd_simulate(const Common& common, double u, std::optional<int> n, std::optional<double> T,
                 std::optional<std::uint64_t> reps, std::optional<std::uint64_t> seed, std::size_t trajectories,
                 std::size_t grid_points) {
  Runner run(common, "simulate");
  auto& sim = run.cfg().sim;
  if (n) sim.n = *n;
  if (T) sim.T = *T;
  if (reps) sim.replications = *reps;
  if (seed) sim.seed = *seed;
  if (run.plan({{"u", u}, {"trajectories", trajectories}, {"grid_points", grid_points}})) return 0;
  SimConfig cfg;
  cfg.n = sim.n;
  cfg.T = sim.T;
  cfg.replications = sim.replications;
  cfg.seed = sim.seed;
  cfg.jobs = run.cfg().solver.jobs;
  const RuinEstimate est = estimate_ruin_probability(run.cfg().model, cfg, u);
  run.write("simulate.json", {{"p_hat", est.p_hat},
                              {"ci", {est.ci.lo, est.ci.hi}},
                              {"replications", est.replications},
                              {"hits", est.hits},
                              {"zero_hits", est.zero_hits},
                              {"u", u},
                              {"n", cfg.n},
                              {"T", cfg.T},
                              {"seed", cfg.seed}});
  if (trajectories > 0) {
    for (std::size_t i = 0; i <= grid_points; ++i)
      cfg.record_grid.push_back(cfg.T * static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(1, grid_points)));
    std::vector<std::vector<double>> rows;
    for (std::size_t r = 0; r < trajectories; ++r) {
      const auto s = sample_trajectory(run.cfg().model, cfg, r, u);
      for (std::size_t i = 0; i < s.times.size(); ++i)
        rows.push_back({static_cast<double>(r), s.times[i], s.f[i], s.g[i], s.ruined ? 1.0 : 0.0});
    }
    run.csv("trajectories.csv", {"replication", "t", "f", "g", "ruined"}, rows);
  }
  run.finish(cfg.seed);
  std::cout << "p_hat " << io::format_double(est.p_hat) << " hits " << est.hits << "\n";
  return 0;
}

int cmd_verify(const Common& common, VerifyOptions opts, bool no_mc) {
  Runner run(common, "verify");
  opts.monte_carlo = !no_mc;
  opts.intervals = run.cfg().solver.intervals;
  opts.jobs = run.cfg().solver.jobs;
  if (run.plan({{"u", opts.u}, {"T", opts.T}, {"monte_carlo", opts.monte_carlo}, {"mc_replications", opts.mc_replications}}))
    return 0;
  const auto checks = run_property_suite(run.cfg().model, opts);
  run.write("verify.json", report_json(checks));
  run.finish(opts.seed);
  for (const auto& c : checks)
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " value=" << io::format_double(c.value)
              << " tol=" << io::format_double(c.tolerance) << (c.detail.empty() ? "" : " (" + c.detail + ")") << "\n";
  return all_passed(checks) ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Large-deviation ruin analysis with a fluctuating client population"};
  app.require_subcommand(1);
  app.set_version_flag("--version", io::kVersion);
  Common common;

  double u = 5.0;
  std::string horizon = "inf";
  auto* decay = app.add_subcommand("decay", "decay rate rho* and optimal horizon t*");
  add_common(decay, common);
  decay->add_option("-u,--u", u, "initial surplus")->capture_default_str();
  decay->add_option("-T,--T", horizon, "horizon (number or inf)")->capture_default_str();

  std::vector<double> Ts = {1, 1.5, 2, 2.5, 3, 3.5, 4, 4.5, 5};
  std::string method = "recovery";
  auto* path = app.add_subcommand("path", "most likely paths to ruin for a list of horizons");
  add_common(path, common);
  path->add_option("-u,--u", u, "initial surplus")->capture_default_str();
  path->add_option("-T,--T", Ts, "horizons")->delimiter(',')->capture_default_str();
  path->add_option("--method", method, "recovery or variational")
      ->check(CLI::IsMember({"recovery", "variational"}))
      ->capture_default_str();

  double attr_T = 1.0;
  std::vector<double> a_list = {0, -0.5, -0.9, -1.1, -1.5, -2};
  std::vector<double> nus;
  for (int k = -3; k <= 8; ++k) nus.push_back(std::ldexp(1.0, k));
  auto* attr = app.add_subcommand("attribute", "E1 attribution over a claim-rate grid at fixed nu * mbar");
  add_common(attr, common);
  attr->add_option("-T,--T", attr_T, "horizon")->capture_default_str();
  attr->add_option("-a,--a", a_list, "terminal net-claims targets")->delimiter(',')->capture_default_str();
  attr->add_option("--nu", nus, "claim rates")->delimiter(',')->capture_default_str();

  std::optional<int> sim_n;
  std::optional<double> sim_T;
  std::optional<std::uint64_t> sim_reps, sim_seed;
  std::size_t trajectories = 0, grid_points = 50;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo ruin probability");
  add_common(sim, common);
  sim->add_option("-u,--u", u, "initial surplus")->capture_default_str();
  sim->add_option("-n,--n", sim_n, "scaling parameter (overrides sim.n)");
  sim->add_option("-T,--T", sim_T, "horizon (overrides sim.T)");
  sim->add_option("-r,--replications", sim_reps, "replications (overrides sim.replications)");
  sim->add_option("-s,--seed", sim_seed, "seed (overrides sim.seed)");
  sim->add_option("--trajectories", trajectories, "number of trajectories to export")->capture_default_str();
  sim->add_option("--grid-points", grid_points, "snapshot intervals per exported trajectory")->capture_default_str();

  VerifyOptions vopts;
  bool no_mc = false;
  auto* verify = app.add_subcommand("verify", "property suite; non-zero exit on any failure");
  add_common(verify, common);
  verify->add_option("-u,--u", vopts.u, "ruin level for the two-solver check")->capture_default_str();
  verify->add_option("-T,--T", vopts.T, "horizon")->capture_default_str();
  verify->add_option("--mc-replications", vopts.mc_replications, "replications per n in the Monte Carlo leg")
      ->capture_default_str();
  verify->add_option("--mc-n", vopts.mc_n, "n values for the Monte Carlo leg")->delimiter(',')->capture_default_str();
  verify->add_option("--seed", vopts.seed, "seed")->capture_default_str();
  verify->add_flag("--no-mc", no_mc, "skip the Monte Carlo leg");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*decay) return cmd_decay(common, u, horizon);
    if (*path) return cmd_path(common, u, Ts, method);
    if (*attr) return cmd_attribute(common, attr_T, a_list, nus);
    if (*sim) return cmd_simulate(common, u, sim_n, sim_T, sim_reps, sim_seed, trajectories, grid_points);
    if (*verify) return cmd_verify(common, vopts, no_mc);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.code;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
