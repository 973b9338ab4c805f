#include "fluctruin/simulate.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <queue>
#include <random>
#include <stdexcept>
#include <thread>

namespace fluctruin {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kChunk = 2048;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t a = splitmix64(seed ^ splitmix64(index));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

// Runs body(chunk_begin, chunk_end, chunk_id) over [0, reps) in fixed chunks;
// callers reduce per-chunk results in chunk order.
void for_chunks(std::uint64_t reps, unsigned jobs, const std::function<void(std::uint64_t, std::uint64_t, std::size_t)>& body) {
  const std::size_t chunks = static_cast<std::size_t>((reps + kChunk - 1) / kChunk);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t c = next++; c < chunks; c = next++)
      body(c * kChunk, std::min<std::uint64_t>(reps, (c + 1) * kChunk), c);
  };
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < std::max(1u, jobs); ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

std::size_t chunk_count(std::uint64_t reps) { return static_cast<std::size_t>((reps + kChunk - 1) / kChunk); }

}  // namespace

void SimConfig::validate() const {
  if (n < 1) throw std::invalid_argument("SimConfig: n must be >= 1");
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("SimConfig: T must be finite and > 0");
  if (replications < 1) throw std::invalid_argument("SimConfig: replications must be >= 1");
  for (std::size_t i = 0; i < record_grid.size(); ++i) {
    if (record_grid[i] < 0.0 || record_grid[i] > T) throw std::invalid_argument("SimConfig: record_grid outside [0, T]");
    if (i > 0 && record_grid[i] < record_grid[i - 1]) throw std::invalid_argument("SimConfig: record_grid must be sorted");
  }
}

TrajectorySample sample_trajectory(const ModelParams& p, const SimConfig& cfg, std::uint64_t index, double u,
                                   bool stop_at_ruin) {
  auto rng = stream(cfg.seed, index);
  const double n = static_cast<double>(cfg.n);
  TrajectorySample s;
  s.initial_clients = cfg.poisson_initial
                          ? (p.f0 > 0.0 ? std::poisson_distribution<std::uint64_t>(n * p.f0)(rng) : 0)
                          : static_cast<std::uint64_t>(std::llround(n * p.f0));
  std::priority_queue<double, std::vector<double>, std::greater<>> leave;
  for (std::uint64_t i = 0; i < s.initial_clients; ++i) leave.push(p.residual.sample(rng));

  std::exponential_distribution<double> unit(1.0);
  const double arrival_rate = n * p.lambda;
  double t = 0.0;
  double next_arrival = arrival_rate > 0.0 ? unit(rng) / arrival_rate : kInf;
  double F = static_cast<double>(s.initial_clients);
  double claims = 0.0, integral = 0.0, running = 0.0;
  const double level = n * u;
  std::size_t k = 0;
  const auto& grid = cfg.record_grid;
  s.times.reserve(grid.size());
  s.f.reserve(grid.size());
  s.g.reserve(grid.size());

  if (0.0 >= level) {
    s.ruined = true;
    s.ruin_time = 0.0;
  }
  if (!(s.ruined && stop_at_ruin)) {
    for (;;) {
      const double next_leave = leave.empty() ? kInf : leave.top();
      const double claim_rate = p.nu * F;
      const double next_claim = claim_rate > 0.0 ? t + unit(rng) / claim_rate : kInf;
      const double tn = std::min({next_arrival, next_leave, next_claim, cfg.T});
      for (; k < grid.size() && grid[k] <= tn; ++k) {
        s.times.push_back(grid[k]);
        s.f.push_back(F / n);
        s.g.push_back((claims - p.r * (integral + F * (grid[k] - t))) / n);
      }
      integral += F * (tn - t);
      running -= p.r * F * (tn - t);
      t = tn;
      if (tn == cfg.T && tn < next_claim && tn < next_arrival && tn < next_leave) break;
      if (tn == next_claim) {
        const double x = p.claim.sample(rng);
        claims += x;
        running += x;
        ++s.claims;
        if (!s.ruined && claims - p.r * integral >= level) {
          s.ruined = true;
          s.ruin_time = t;
          if (stop_at_ruin) break;
        }
      } else if (tn == next_arrival) {
        F += 1.0;
        ++s.arrivals;
        leave.push(t + p.sojourn.sample(rng));
        next_arrival = t + unit(rng) / arrival_rate;
      } else {
        leave.pop();
        F -= 1.0;
        if (cfg.record_departures) s.departures.push_back(t);
      }
      if (t >= cfg.T) break;
    }
  }
  s.claim_total = claims;
  s.client_time = integral;
  s.g_final = claims - p.r * integral;
  s.conservation_error = std::abs(running - s.g_final) / std::max(1.0, claims);
  return s;
}

Interval wilson_interval(std::uint64_t hits, std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double N = static_cast<double>(trials);
  const double ph = static_cast<double>(hits) / N;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / N;
  const double centre = (ph + z2 / (2.0 * N)) / denom;
  const double half = z / denom * std::sqrt(ph * (1.0 - ph) / N + z2 / (4.0 * N * N));
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

RuinEstimate estimate_ruin_probability(const ModelParams& p, const SimConfig& cfg, double u) {
  cfg.validate();
  if (!(u >= 0.0)) throw std::invalid_argument("estimate_ruin_probability: u must be >= 0");
  const auto start = std::chrono::steady_clock::now();
  SimConfig c = cfg;
  c.record_grid.clear();
  c.record_departures = false;
  std::vector<std::uint64_t> hits(chunk_count(cfg.replications), 0);
  for_chunks(cfg.replications, cfg.jobs, [&](std::uint64_t b, std::uint64_t e, std::size_t id) {
    std::uint64_t h = 0;
    for (std::uint64_t i = b; i < e; ++i) h += sample_trajectory(p, c, i, u, true).ruined ? 1 : 0;
    hits[id] = h;
  });
  RuinEstimate est;
  est.replications = cfg.replications;
  for (auto h : hits) est.hits += h;
  est.p_hat = static_cast<double>(est.hits) / static_cast<double>(est.replications);
  if (est.hits == 0) {
    est.zero_hits = true;
    est.ci = {0.0, 1.0 - std::pow(0.05, 1.0 / static_cast<double>(est.replications))};
  } else {
    est.ci = wilson_interval(est.hits, est.replications);
  }
  est.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return est;
}

EmpiricalDecay empirical_decay(const ModelParams& p, double u, double T, const std::vector<int>& n_list,
                               std::uint64_t replications, std::uint64_t seed, unsigned jobs) {
  if (n_list.size() < 3) throw std::invalid_argument("empirical_decay: need at least 3 values of n");
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (n_list[i] <= n_list[i - 1]) throw std::invalid_argument("empirical_decay: n-list must increase");
  EmpiricalDecay out;
  std::vector<double> xs, ys;
  for (int n : n_list) {
    SimConfig cfg;
    cfg.n = n;
    cfg.T = T;
    cfg.replications = replications;
    cfg.seed = splitmix64(seed + static_cast<std::uint64_t>(n));
    cfg.jobs = jobs;
    DecayRow row;
    row.n = n;
    row.estimate = estimate_ruin_probability(p, cfg, u);
    if (row.estimate.hits == 0) {
      out.dropped.push_back(n);
      row.rate = kInf;
    } else {
      row.rate = -std::log(row.estimate.p_hat) / n;
      xs.push_back(n);
      ys.push_back(-std::log(row.estimate.p_hat));
    }
    out.rows.push_back(row);
  }
  if (xs.size() < 2) {
    out.slope = out.intercept = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  const double m = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  out.slope = (sxy - sx * sy / m) / (sxx - sx * sx / m);
  out.intercept = (sy - out.slope * sx) / m;
  return out;
}

ConditionedEnsemble conditioned_ensemble(const ModelParams& p, const SimConfig& cfg, double u, std::uint64_t min_hits) {
  cfg.validate();
  if (cfg.record_grid.empty()) throw std::invalid_argument("conditioned_ensemble: record_grid required");
  const std::size_t m = cfg.record_grid.size();
  struct Part {
    std::vector<double> sum_ruined, sum_all;
    std::uint64_t hits = 0;
  };
  std::vector<Part> parts(chunk_count(cfg.replications));
  for_chunks(cfg.replications, cfg.jobs, [&](std::uint64_t b, std::uint64_t e, std::size_t id) {
    Part part{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0), 0};
    for (std::uint64_t i = b; i < e; ++i) {
      const auto s = sample_trajectory(p, cfg, i, u, false);
      for (std::size_t j = 0; j < m; ++j) part.sum_all[j] += s.f[j];
      if (!s.ruined) continue;
      ++part.hits;
      for (std::size_t j = 0; j < m; ++j) part.sum_ruined[j] += s.f[j];
    }
    parts[id] = std::move(part);
  });
  ConditionedEnsemble out;
  out.times = cfg.record_grid;
  out.replications = cfg.replications;
  out.mean_f.assign(m, 0.0);
  out.mean_f_all.assign(m, 0.0);
  for (const auto& part : parts) {
    out.hits += part.hits;
    for (std::size_t j = 0; j < m; ++j) {
      out.mean_f[j] += part.sum_ruined[j];
      out.mean_f_all[j] += part.sum_all[j];
    }
  }
  if (out.hits < min_hits) throw std::runtime_error("conditioned_ensemble: too few ruin events");
  for (std::size_t j = 0; j < m; ++j) {
    out.mean_f[j] /= static_cast<double>(out.hits);
    out.mean_f_all[j] /= static_cast<double>(out.replications);
  }
  return out;
}

ChiSquare occupancy_chi_square(const ModelParams& p, const SimConfig& cfg, double t) {
  if (std::abs(p.f0 - p.lambda * p.sojourn.mean()) > 1e-9 * std::max(1.0, p.f0))
    throw std::invalid_argument("occupancy_chi_square: f0 must equal lambda * mean sojourn");
  SimConfig c = cfg;
  c.record_grid = {t};
  c.poisson_initial = true;
  c.validate();
  std::vector<std::vector<std::uint64_t>> parts(chunk_count(c.replications));
  for_chunks(c.replications, c.jobs, [&](std::uint64_t b, std::uint64_t e, std::size_t id) {
    std::vector<std::uint64_t> h;
    for (std::uint64_t i = b; i < e; ++i) {
      const auto s = sample_trajectory(p, c, i);
      const auto k = static_cast<std::size_t>(std::llround(s.f[0] * c.n));
      if (k >= h.size()) h.resize(k + 1, 0);
      ++h[k];
    }
    parts[id] = std::move(h);
  });
  std::vector<std::uint64_t> counts;
  for (const auto& h : parts) {
    if (h.size() > counts.size()) counts.resize(h.size(), 0);
    for (std::size_t k = 0; k < h.size(); ++k) counts[k] += h[k];
  }
  const double N = static_cast<double>(c.replications);
  const boost::math::poisson_distribution<double> law(c.n * p.f0);
  // bins [k_lo, k_hi) with expected count >= 5; the last bin takes the upper tail
  ChiSquare out;
  double observed = 0.0, expected = 0.0;
  int bins = 0;
  std::size_t k = 0;
  const auto observed_at = [&](std::size_t j) { return j < counts.size() ? static_cast<double>(counts[j]) : 0.0; };
  for (;; ++k) {
    observed += observed_at(k);
    expected += N * boost::math::pdf(law, static_cast<double>(k));
    const double rest = N * boost::math::cdf(boost::math::complement(law, static_cast<double>(k)));
    if (expected >= 5.0 && rest >= 5.0) {
      out.statistic += (observed - expected) * (observed - expected) / expected;
      ++bins;
      observed = expected = 0.0;
    } else if (rest < 5.0) {
      // fold the remaining tail into this bin
      for (std::size_t j = k + 1; j < counts.size(); ++j) observed += observed_at(j);
      expected += rest;
      out.statistic += (observed - expected) * (observed - expected) / expected;
      ++bins;
      break;
    }
  }
  out.dof = std::max(1, bins - 1);
  out.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(out.dof), out.statistic));
  return out;
}

}  // namespace fluctruin
