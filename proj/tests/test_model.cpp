#include <doctest.h>

#include "fluctruin/model.hpp"

#include <cmath>

using namespace fluctruin;

namespace {
ModelParams top() {
  return ModelParams(1.0, 1.0, 3.0, 3.0, Distribution::exponential(1.5), Distribution::exponential(1.0));
}
ModelParams bottom() {
  return ModelParams(3.0, 0.0, 3.0, 3.0, Distribution::exponential(1.5), Distribution::uniform(0.0, 1.0));
}
}  // namespace

TEST_SUITE("model") {
  TEST_CASE("adjustment coefficient") {
    // -3 t + 3 (1.5 / (1.5 - t) - 1) = 0  =>  t = 0.5
    CHECK(*adjustment_coefficient(top()) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(log_phi(top(), 0.5) == doctest::Approx(0.0).epsilon(1e-14));
    const ModelParams loss(1.0, 1.0, 3.0, 1.0, Distribution::exponential(1.5), Distribution::exponential(1.0));
    CHECK_FALSE(net_profit_holds(loss));
    CHECK_FALSE(adjustment_coefficient(loss).has_value());
  }

  TEST_CASE("log phi derivatives") {
    const auto p = top();
    for (double th : {-1.0, 0.0, 0.7, 1.2}) {
      const auto lp = log_phi_derivs(p, th);
      const double h = 1e-5;
      CHECK(lp.d1 == doctest::Approx((log_phi(p, th + h) - log_phi(p, th - h)) / (2 * h)).epsilon(1e-7));
      CHECK(lp.d2 == doctest::Approx((log_phi(p, th + h) - 2 * lp.value + log_phi(p, th - h)) / (h * h)).epsilon(1e-4));
    }
    CHECK_THROWS_AS(phi(p, 1.5), std::domain_error);
  }

  TEST_CASE("fluid limits") {
    // exponential sojourn with stationary residual: fbar stays at f0 = lambda * mean
    for (double t : {0.0, 0.5, 3.0}) {
      CHECK(fluid_population(top(), t) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(fluid_claims(top(), t) == doctest::Approx(-t).epsilon(1e-12));
    }
    // uniform sojourn from empty: 3 (t - t^2 / 2) on [0, 1], then 1.5
    CHECK(fluid_population(bottom(), 0.5) == doctest::Approx(1.125).epsilon(1e-12));
    CHECK(fluid_population(bottom(), 2.0) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(fluid_population_integral(bottom(), 2.0) == doctest::Approx(1.0 + 1.5).epsilon(1e-12));
  }

  TEST_CASE("validation") {
    CHECK_THROWS(ModelParams(-1.0, 1.0, 1.0, 1.0, Distribution::exponential(1.0), Distribution::exponential(1.0)));
    CHECK_THROWS(ModelParams(1.0, 1.0, 1.0, 1.0, Distribution::exponential(1.0), Distribution::exponential(1.0),
                             Distribution::deterministic(1.0)));
    const auto p = top();
    CHECK(p.theta_cap() < p.theta_max());
    CHECK(p.residual.family() == Distribution::Family::ExcessOf);
  }
}
