#include <doctest.h>

#include "fluctruin/attribution.hpp"

#include <cmath>

using namespace fluctruin;

namespace {
ModelParams base() {
  return ModelParams(1.0, 1.0, 1.0, 2.0, Distribution::exponential(1.0), Distribution::exponential(1.0));
}
}  // namespace

TEST_SUITE("attribution") {
  TEST_CASE("closed-form limit at nu = 1") {
    // 2 int_0^1 (1 - e^{-s})^2 ds over itself plus E[X^2] * int fbar = 2
    const double num = 2.0 * (1.0 - 2.0 * (1.0 - std::exp(-1.0)) + 0.5 * (1.0 - std::exp(-2.0)));
    CHECK(num == doctest::Approx(0.336182).epsilon(1e-5));
    CHECK(e1_limit_exponential(base(), 1.0) == doctest::Approx(num / (num + 2.0)).epsilon(1e-12));
  }

  TEST_CASE("limit rejects non-exponential sojourn") {
    const ModelParams p(1.0, 1.0, 1.0, 2.0, Distribution::exponential(1.0), Distribution::uniform(0.0, 2.0));
    CHECK_THROWS(e1_limit_exponential(p, 1.0));
  }

  TEST_CASE("e1 + e2 = 1 and the denominator") {
    const auto r = e1(base(), -1.5, 1.0, 32);
    CHECK(r.e1 + r.e2 == 1.0);
    CHECK(r.denominator == doctest::Approx(0.5));
    CHECK(r.e1 > 0.0);
    CHECK(r.e1 < 1.0);
    CHECK_THROWS(e1(base(), fluid_claims(base(), 1.0), 1.0));
  }

  TEST_CASE("extrapolation towards the fluid endpoint") {
    for (double nu : {0.125, 1.0, 8.0, 256.0}) {
      const auto p = with_claim_rate(base(), nu);
      CHECK(p.nu * p.claim_mean() == doctest::Approx(1.0));
      const auto ex = e1_extrapolated(p, 1.0, {0.2, 0.1, 0.05}, 32);
      CHECK(ex.limit == doctest::Approx(e1_limit_exponential(p, 1.0)).epsilon(0.05));
    }
  }

  TEST_CASE("lower targets attribute more to the population") {
    const auto p = base();
    double prev = -1.0;
    for (double a : {0.0, -0.5, -1.5, -2.0}) {
      const double v = e1(p, a, 1.0, 32).e1;
      CHECK(v > prev);
      prev = v;
    }
  }

  TEST_CASE("sweep table") {
    const auto rows = attribution_sweep(base(), {-2.0, 0.0}, {1.0, 256.0}, 1.0, 2, 32);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].nu == 1.0);
    CHECK(rows[1].a == 0.0);
    CHECK(rows[0].e1_limit == rows[1].e1_limit);
    for (const auto& r : rows) CHECK(r.ok);
    CHECK(rows[2].e1 > 0.9);
    CHECK(rows[0].e1 > rows[1].e1);
  }

  TEST_CASE("marginal allocation profile") {
    const auto mc = marginal_rate_check(base(), 1.0, 0.05, 64);
    CHECK(mc.r2 > 0.95);
    CHECK(mc.slope > 0.0);
  }
}
