#include <doctest.h>

#include "fluctruin/distribution.hpp"

#include <cmath>
#include <random>

using namespace fluctruin;

namespace {

// law-level integrals by adaptive Simpson (independent of the Gauss rules)
double integrate(const std::function<double(double)>& f, double a, double b) {
  return quad::adaptive_simpson(f, a, b, 1e-11, 30).value;
}

std::vector<Distribution> continuous_laws() {
  return {Distribution::exponential(1.5), Distribution::uniform(0.0, 1.0), Distribution::uniform(0.5, 2.0),
          Distribution::gamma(2.0, 4.0), Distribution::gamma(2.5, 1.0),
          Distribution::excess_of(Distribution::uniform(0.0, 1.0)),
          Distribution::excess_of(Distribution::gamma(3.0, 2.0))};
}

}  // namespace

TEST_SUITE("distribution") {
  TEST_CASE("density normalises and matches tail and mean") {
    for (const auto& d : continuous_laws()) {
      CAPTURE(d.family_name());
      const double hi = d.truncation_point(1e-14);
      CHECK(integrate([&](double x) { return d.density(x); }, 0.0, hi) == doctest::Approx(1.0).epsilon(1e-8));
      CHECK(integrate([&](double x) { return d.tail(x); }, 0.0, hi) == doctest::Approx(d.mean()).epsilon(1e-8));
      CHECK(d.tail(0.3) == doctest::Approx(integrate([&](double x) { return d.density(x); }, 0.3, hi)).epsilon(1e-8));
      CHECK(d.stop_loss(0.4) == doctest::Approx(integrate([&](double x) { return d.tail(x); }, 0.4, hi)).epsilon(1e-8));
    }
  }

  TEST_CASE("mgf and derivatives against quadrature") {
    for (const auto& d : continuous_laws()) {
      CAPTURE(d.family_name());
      const double hi = d.truncation_point(1e-16);
      for (double th : {-2.0, -0.3, 0.0, 0.4}) {
        if (th >= d.mgf_abscissa()) continue;
        for (int k = 0; k < 3; ++k) {
          const double ref = integrate([&](double x) { return std::pow(x, k) * std::exp(th * x) * d.density(x); }, 0.0, hi);
          CHECK(d.mgf_derivative(th, k) == doctest::Approx(ref).epsilon(1e-7));
        }
      }
    }
    CHECK(std::isinf(Distribution::exponential(1.5).mgf(1.5)));
    CHECK(Distribution::exponential(1.5).mgf(0.5) == doctest::Approx(1.5));
  }

  TEST_CASE("excess-of series branch is continuous") {
    const auto d = Distribution::excess_of(Distribution::uniform(0.0, 1.0));
    for (int k = 0; k < 3; ++k) {
      const double a = d.mgf_derivative(1e-4, k), b = d.mgf_derivative(2e-1, k);
      const double c = d.mgf_derivative(0.02, k), e = d.mgf_derivative(0.021, k);
      CHECK(std::isfinite(a));
      CHECK(std::isfinite(b));
      CHECK(std::abs(c - e) < 1e-2);
    }
    CHECK(d.mean() == doctest::Approx(1.0 / 3.0));
  }

  TEST_CASE("raw moments") {
    CHECK(Distribution::exponential(2.0).raw_moment(2) == doctest::Approx(0.5));
    CHECK(Distribution::uniform(0.0, 1.0).raw_moment(3) == doctest::Approx(0.25));
    CHECK(Distribution::gamma(2.0, 1.0).raw_moment(2) == doctest::Approx(6.0));
    CHECK(Distribution::deterministic(2.0).raw_moment(4) == doctest::Approx(16.0));
  }

  TEST_CASE("deterministic law is atomic") {
    const auto d = Distribution::deterministic(0.7);
    CHECK(d.is_atomic());
    CHECK(d.tail(0.69) == 1.0);
    CHECK(d.tail(0.7) == 0.0);
    const auto r = d.density_rule(0.0, 1.0);
    CHECK(r.integrate([](double x) { return x * x; }) == doctest::Approx(0.49));
  }

  TEST_CASE("scaled law") {
    const auto d = Distribution::exponential(1.0).scaled(0.25);
    CHECK(d.mean() == doctest::Approx(0.25));
    CHECK(d.mgf_abscissa() == doctest::Approx(4.0));
  }

  TEST_CASE("sample means") {
    std::mt19937_64 rng(3);
    for (const auto& d : continuous_laws()) {
      CAPTURE(d.family_name());
      const int n = 200000;
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += d.sample(rng);
      const double se = std::sqrt(d.variance() / n);
      CHECK(std::abs(s / n - d.mean()) < 4.0 * se);
    }
  }

  TEST_CASE("invalid parameters are rejected") {
    CHECK_THROWS(Distribution::exponential(0.0));
    CHECK_THROWS(Distribution::uniform(1.0, 1.0));
    CHECK_THROWS(Distribution::gamma(0.5, 1.0));
    CHECK_THROWS(Distribution::excess_of(Distribution::excess_of(Distribution::exponential(1.0))));
  }
}
