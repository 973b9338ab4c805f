#include <doctest.h>

#include "fluctruin/pathsolver.hpp"

#include <cmath>

using namespace fluctruin;

namespace {
ModelParams top() {
  return ModelParams(1.0, 1.0, 3.0, 3.0, Distribution::exponential(1.5), Distribution::exponential(1.0));
}
ModelParams bottom() {
  return ModelParams(3.0, 0.0, 3.0, 3.0, Distribution::exponential(1.5), Distribution::uniform(0.0, 1.0));
}
RuinQuery query(double u, double T, std::size_t d = 32) {
  RuinQuery q;
  q.level = u;
  q.T = T;
  q.intervals = d;
  return q;
}
}  // namespace

TEST_SUITE("pathsolver") {
  TEST_CASE("decay rate equals u times the adjustment coefficient") {
    // exponential(1.5) claims, nu = r = 3: theta = 0.5, so rho* = 2.5
    for (const auto& p : {top(), bottom()}) {
      const auto dr = decay_rate(p, 5.0, 5.0);
      CHECK(dr.converged);
      CHECK(dr.rho == doctest::Approx(2.5).epsilon(1e-6));
    }
    CHECK(decay_rate(top(), 5.0, std::numeric_limits<double>::infinity()).rho == doctest::Approx(2.5).epsilon(1e-6));
  }

  TEST_CASE("optimal horizons from the time change") {
    // int_0^t* fbar = u / L'(theta) with L'(0.5) = -3 + 3 * 1.5 / 1 = 1.5
    CHECK(decay_rate(top(), 5.0, 5.0).t_star == doctest::Approx(5.0 / 1.5).epsilon(1e-3));
    // bottom row: int_0^t fbar = 1 + 1.5 (t - 1) for t >= 1
    CHECK(decay_rate(bottom(), 5.0, 5.0).t_star == doctest::Approx(1.0 + (5.0 / 1.5 - 1.0) / 1.5).epsilon(1e-3));
  }

  TEST_CASE("rho(t) decreases towards t* and vanishes for small u") {
    const auto p = top();
    double prev = std::numeric_limits<double>::infinity();
    for (double t : {0.25, 0.5, 1.0, 2.0, 3.0, 3.3}) {
      const double r = decay_at_horizon(p, 5.0, t).value;
      CHECK(r < prev);
      prev = r;
    }
    // small surplus: still u times the adjustment coefficient, reached early
    const auto small = decay_rate(p, 0.05, 5.0);
    CHECK(small.rho == doctest::Approx(0.025).epsilon(0.02));
    CHECK(small.t_star < 0.2);
    CHECK(decay_at_horizon(p, 5.0, 1.0).value > 2.5);
  }

  TEST_CASE("no claims: ruin above the fluid path is unreachable only through the population") {
    const ModelParams p(1.0, 1.0, 0.0, 1.0, Distribution::exponential(1.0), Distribution::exponential(1.0));
    // g is -r times the client time, so g >= u > 0 cannot happen
    CHECK(std::isinf(decay_at_horizon(p, 0.5, 2.0).value));
  }

  TEST_CASE("recovered path at zero duals is the fluid path") {
    const auto p = bottom();
    RuinQuery q = query(fluid_claims(p, 2.0), 2.0, 16);
    q.target = RuinQuery::Target::Point;
    const auto mp = most_likely_path(p, q);
    CHECK(mp.theta_star == 0.0);
    for (std::size_t i = 0; i < mp.path.t.size(); ++i) {
      CHECK(mp.path.f[i] == doctest::Approx(fluid_population(p, mp.path.t[i])).epsilon(1e-8));
      CHECK(mp.path.g[i] == doctest::Approx(fluid_claims(p, mp.path.t[i])).epsilon(1e-8));
    }
  }

  TEST_CASE("path ordering and terminal consistency") {
    const auto p = top();
    const double ts = decay_rate(p, 5.0, 5.0).t_star;
    for (double T : {1.0, 2.0, ts, 4.5}) {
      const auto mp = most_likely_path(p, query(5.0, T, 24));
      CHECK(mp.failed_nodes.empty());
      CHECK(mp.path.g.back() == doctest::Approx(5.0).epsilon(1e-6));
      CHECK(mp.path.g.front() == 0.0);
      CHECK(mp.path.f.front() == 1.0);
      for (std::size_t i = 1; i < mp.path.t.size(); ++i) {
        const double dev = mp.path.f[i] - fluid_population(p, mp.path.t[i]);
        if (T < ts - 1e-6) CHECK(dev > 0.0);
        else if (T > ts + 1e-6 && mp.path.t[i] <= ts) CHECK(dev < 0.0);
        else if (std::abs(T - ts) < 1e-6) CHECK(std::abs(dev) < 0.03);
      }
    }
  }

  TEST_CASE("variational solver agrees with path recovery") {
    for (const auto& p : {top(), bottom()}) {
      for (double T : {1.5, 4.0}) {
        const auto q = query(5.0, T, 32);
        const auto a = most_likely_path(p, q);
        const auto b = most_likely_path_variational(p, q, &a.path);
        CHECK(b.converged);
        CHECK(b.rate == doctest::Approx(a.rate).epsilon(0.02));
        CHECK(path_distance(a.path, b.path) < 0.05 * 5.0);
      }
    }
  }

  TEST_CASE("variational solver at the fluid endpoint has zero action") {
    const auto p = top();
    RuinQuery q = query(fluid_claims(p, 2.0), 2.0, 16);
    q.target = RuinQuery::Target::Point;
    const auto b = most_likely_path_variational(p, q);
    CHECK(b.rate == doctest::Approx(0.0).scale(1.0).epsilon(1e-8));
  }

  TEST_CASE("without claims the action is carried by the population") {
    const ModelParams p(1.0, 1.0, 0.0, 1.0, Distribution::exponential(1.0), Distribution::exponential(1.0));
    RuinQuery q = query(-1.5, 2.0, 16);  // fluid gives -2
    q.target = RuinQuery::Target::Point;
    const auto b = most_likely_path_variational(p, q);
    CHECK(b.rate > 0.0);
    CHECK(b.path.g.back() == doctest::Approx(-1.5).epsilon(1e-9));
    for (std::size_t i = 1; i < b.path.t.size(); ++i) {
      const double dt = b.path.t[i] - b.path.t[i - 1];
      CHECK((b.path.g[i] - b.path.g[i - 1]) / dt == doctest::Approx(-0.5 * (b.path.f[i] + b.path.f[i - 1])).epsilon(1e-9));
    }
    // the population has to stay below its mean
    CHECK(b.path.f[8] < 1.0);
  }

  TEST_CASE("invalid queries") {
    CHECK_THROWS(decay_at_horizon(top(), 0.0, 1.0));
    CHECK_THROWS(decay_rate(top(), 5.0, -1.0));
    CHECK_THROWS(most_likely_path(top(), query(5.0, 2.0, 1)));
  }
}
