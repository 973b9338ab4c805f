#include <doctest.h>

#include "fluctruin/simulate.hpp"

#include <boost/math/distributions/poisson.hpp>

#include <algorithm>
#include <cmath>

using namespace fluctruin;

namespace {
ModelParams top() {
  return ModelParams(1.0, 1.0, 3.0, 3.0, Distribution::exponential(1.5), Distribution::exponential(1.0));
}
SimConfig cfg(int n, double T, std::uint64_t reps, std::uint64_t seed = 7) {
  SimConfig c;
  c.n = n;
  c.T = T;
  c.replications = reps;
  c.seed = seed;
  return c;
}
}  // namespace

TEST_SUITE("simulate") {
  TEST_CASE("same seed, same answer, whatever the thread count") {
    auto c = cfg(10, 2.0, 3000);
    const auto a = estimate_ruin_probability(top(), c, 0.5);
    c.jobs = 3;
    const auto b = estimate_ruin_probability(top(), c, 0.5);
    CHECK(a.hits == b.hits);
    CHECK(a.p_hat == b.p_hat);
    const auto s1 = sample_trajectory(top(), c, 17);
    const auto s2 = sample_trajectory(top(), c, 17);
    CHECK(s1.g_final == s2.g_final);
    CHECK(s1.claims == s2.claims);
  }

  TEST_CASE("trivial levels") {
    CHECK(estimate_ruin_probability(top(), cfg(5, 1.0, 200), 0.0).p_hat == 1.0);
    const ModelParams none(1.0, 1.0, 0.0, 1.0, Distribution::exponential(1.0), Distribution::exponential(1.0));
    CHECK(estimate_ruin_probability(none, cfg(5, 1.0, 200), 0.1).hits == 0);
    auto c = cfg(5, 2.0, 1);
    c.record_grid = {0.0, 0.5, 1.0, 1.5, 2.0};
    const auto s = sample_trajectory(none, c, 0);
    for (std::size_t i = 1; i < s.g.size(); ++i) CHECK(s.g[i] <= s.g[i - 1]);
  }

  TEST_CASE("sample mean follows the fluid population") {
    const auto p = top();
    auto c = cfg(20, 3.0, 4000);
    c.record_grid = {0.5, 1.5, 3.0};
    std::vector<double> sum(3, 0.0), sq(3, 0.0);
    for (std::uint64_t i = 0; i < c.replications; ++i) {
      const auto s = sample_trajectory(p, c, i);
      for (int k = 0; k < 3; ++k) {
        sum[k] += s.f[k];
        sq[k] += s.f[k] * s.f[k];
      }
      CHECK(s.conservation_error < 1e-9);
    }
    const double N = static_cast<double>(c.replications);
    for (int k = 0; k < 3; ++k) {
      const double mean = sum[k] / N;
      const double se = std::sqrt((sq[k] / N - mean * mean) / N);
      CHECK(std::abs(mean - fluid_population(p, c.record_grid[k])) < 3.0 * se + 1e-12);
    }
  }

  TEST_CASE("departures from an empty start are bounded by arrivals") {
    // started empty, departures in (t, t + delta] need arrivals before t + delta
    const ModelParams p(2.0, 0.0, 1.0, 2.0, Distribution::exponential(1.0), Distribution::uniform(0.0, 1.0));
    auto c = cfg(50, 1.0, 200);
    c.record_departures = true;
    const double delta = 0.1;
    const boost::math::poisson_distribution<double> arrivals(50 * 2.0 * delta);
    const double q = boost::math::quantile(boost::math::complement(arrivals, 1e-6));
    for (std::uint64_t i = 0; i < c.replications; ++i) {
      const auto s = sample_trajectory(p, c, i);
      CHECK(s.initial_clients == 0);
      CHECK(std::is_sorted(s.departures.begin(), s.departures.end()));
      const auto early = std::count_if(s.departures.begin(), s.departures.end(), [&](double t) { return t <= delta; });
      CHECK(static_cast<double>(early) <= q);
      CHECK(s.departures.size() <= s.arrivals);
    }
  }

  TEST_CASE("wilson interval") {
    const auto ci = wilson_interval(50, 1000);
    CHECK(ci.lo < 0.05);
    CHECK(ci.hi > 0.05);
    CHECK(ci.lo == doctest::Approx(0.0381).epsilon(1e-2));
    const auto z = estimate_ruin_probability(top(), cfg(60, 1.0, 100), 5.0);
    CHECK(z.zero_hits);
    CHECK(z.ci.lo == 0.0);
    CHECK(z.ci.hi == doctest::Approx(1.0 - std::pow(0.05, 0.01)));
  }

  TEST_CASE("equilibrium occupancy") {
    auto c = cfg(20, 4.0, 5000, 11);
    c.poisson_initial = true;
    const auto chi = occupancy_chi_square(top(), c, 4.0);
    CHECK(chi.dof > 3);
    CHECK(chi.p_value > 1e-3);
  }

  TEST_CASE("empirical decay at zero surplus") {
    const auto ed = empirical_decay(top(), 0.0, 1.0, {5, 10, 20}, 200, 3);
    CHECK(ed.slope == doctest::Approx(0.0).scale(1.0));
    CHECK(ed.dropped.empty());
  }

  TEST_CASE("config validation") {
    CHECK_THROWS(cfg(0, 1.0, 10).validate());
    CHECK_THROWS(cfg(5, -1.0, 10).validate());
    CHECK_THROWS(cfg(5, 1.0, 0).validate());
  }
}
