#include "fluctruin/attribution.hpp"

#include "fluctruin/quadrature.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace fluctruin {
namespace {

// composite Simpson on a uniform grid (trapezoid on a trailing odd cell)
double grid_integral(const std::vector<double>& t, const std::vector<double>& v) {
  const std::size_t n = t.size() - 1;
  double acc = 0.0;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc += (t[i + 2] - t[i]) / 6.0 * (v[i] + 4.0 * v[i + 1] + v[i + 2]);
  if (i < n) acc += 0.5 * (t[n] - t[n - 1]) * (v[n - 1] + v[n]);
  return acc;
}

double sojourn_rate(const ModelParams& p) {
  if (p.sojourn.family() != Distribution::Family::Exponential)
    throw std::invalid_argument("exponential sojourn law required");
  return p.sojourn.parameters().at(0);
}

}  // namespace

AttributionResult e1(const ModelParams& p, double a, double T, std::size_t intervals) {
  if (!net_profit_holds(p)) throw std::invalid_argument("e1: net profit condition fails");
  const double gbar = fluid_claims(p, T);
  if (a == gbar) throw std::invalid_argument("e1: a must differ from gbar(T)");
  RuinQuery q;
  q.level = a;
  q.T = T;
  q.target = RuinQuery::Target::Point;
  q.intervals = intervals;
  AttributionResult out;
  out.a = a;
  out.T = T;
  out.path = most_likely_path(p, q);
  if (!out.path.failed_nodes.empty()) throw std::runtime_error("e1: conditioned path recovery failed");
  const double extra = grid_integral(out.path.path.t, out.path.path.f) - fluid_population_integral(p, T);
  out.numerator = (p.r - p.claim_mean() * p.nu) * extra;
  out.denominator = gbar - a;
  out.e1 = out.numerator / out.denominator;
  out.e2 = 1.0 - out.e1;
  return out;
}

double e1_limit_exponential(const ModelParams& p, double T) {
  const double mu = sojourn_rate(p);
  if (!net_profit_holds(p)) throw std::invalid_argument("e1_limit_exponential: net profit condition fails");
  const double margin = p.r - p.nu * p.claim_mean();
  const auto rule = quad::composite_gauss(0.0, T, {}, {.order = 16, .max_panel = 0.125});
  const double num = rule.integrate([&](double t) {
    const double k = margin / mu * (1.0 - std::exp(-mu * (T - t)));
    return (p.lambda + fluid_population(p, t) * mu) * k * k;
  });
  const double claims_var = p.nu * p.claim.raw_moment(2) * fluid_population_integral(p, T);
  return num / (num + claims_var);
}

E1Extrapolation e1_extrapolated(const ModelParams& p, double T, std::vector<double> eps, std::size_t intervals) {
  if (eps.empty()) throw std::invalid_argument("e1_extrapolated: empty schedule");
  E1Extrapolation out;
  out.eps = std::move(eps);
  const double gbar = fluid_claims(p, T);
  for (double e : out.eps) out.e1.push_back(e1(p, gbar - e, T, intervals).e1);
  // Neville's scheme at 0
  std::vector<double> P = out.e1;
  const auto& x = out.eps;
  for (std::size_t m = 1; m < P.size(); ++m)
    for (std::size_t i = 0; i + m < P.size(); ++i) P[i] = (x[i + m] * P[i] - x[i] * P[i + 1]) / (x[i + m] - x[i]);
  out.limit = P[0];
  return out;
}

ModelParams with_claim_rate(const ModelParams& p, double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("with_claim_rate: nu must be > 0");
  const double c = p.nu / nu;
  return ModelParams(p.lambda, p.f0, nu, p.r, p.claim.scaled(c), p.sojourn, p.residual);
}

std::vector<SweepRow> attribution_sweep(const ModelParams& p, const std::vector<double>& a_list,
                                        const std::vector<double>& nu_grid, double T, unsigned jobs,
                                        std::size_t intervals) {
  std::vector<SweepRow> rows(a_list.size() * nu_grid.size());
  const bool expo = p.sojourn.family() == Distribution::Family::Exponential;
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t k = next++; k < rows.size(); k = next++) {
      SweepRow& row = rows[k];
      row.nu = nu_grid[k / a_list.size()];
      row.a = a_list[k % a_list.size()];
      row.e1 = row.e1_limit = std::numeric_limits<double>::quiet_NaN();
      try {
        const ModelParams q = with_claim_rate(p, row.nu);
        if (expo) row.e1_limit = e1_limit_exponential(q, T);
        row.e1 = e1(q, row.a, T, intervals).e1;
      } catch (const std::exception& ex) {
        row.ok = false;
        row.error = ex.what();
      }
    }
  };
  jobs = std::max(1u, jobs);
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return rows;
}

MarginalCheck marginal_rate_check(const ModelParams& p, double T, double eps, std::size_t intervals) {
  const double mu = sojourn_rate(p);
  const AttributionResult res = e1(p, fluid_claims(p, T) - eps, T, intervals);
  const PathGrid& path = res.path.path;
  const std::size_t n = path.t.size();
  std::vector<double> D(n);
  for (std::size_t i = 0; i < n; ++i) D[i] = path.f[i] - fluid_population(p, path.t[i]);
  const PathGrid diff(path.t, std::vector<double>(n, 0.0), D);
  const auto dD = diff.g_prime();
  const double margin = p.r - p.nu * p.claim_mean();
  MarginalCheck out;
  for (std::size_t i = 0; i < n; ++i) {
    const double k = margin / mu * (1.0 - std::exp(-mu * (T - path.t[i])));
    out.t.push_back(path.t[i]);
    out.c.push_back((dD[i] + mu * D[i]) * k);
    out.w.push_back((p.lambda + fluid_population(p, path.t[i]) * mu) * k * k);
  }
  // least squares c ~ alpha + slope w
  const double m = static_cast<double>(n);
  double sw = 0, sc = 0, sww = 0, swc = 0, scc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += out.w[i];
    sc += out.c[i];
    sww += out.w[i] * out.w[i];
    swc += out.w[i] * out.c[i];
    scc += out.c[i] * out.c[i];
  }
  const double vw = sww - sw * sw / m, vc = scc - sc * sc / m, cov = swc - sw * sc / m;
  out.slope = vw > 0.0 ? cov / vw : 0.0;
  out.r2 = vw > 0.0 && vc > 0.0 ? cov * cov / (vw * vc) : 0.0;
  return out;
}

}  // namespace fluctruin
