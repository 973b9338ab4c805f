#include <doctest.h>

#include "fluctruin/quadrature.hpp"

#include <cmath>

using namespace fluctruin::quad;

TEST_SUITE("quadrature") {
  TEST_CASE("gauss-legendre is exact to degree 2n-1") {
    for (int n : {2, 4, 8, 16, 32}) {
      const Rule& r = gauss_legendre(n);
      for (int k = 0; k <= 2 * n - 1; ++k) {
        const double exact = (k % 2 == 0) ? 2.0 / (k + 1) : 0.0;
        CHECK(r.integrate([k](double x) { return std::pow(x, k); }) == doctest::Approx(exact).epsilon(1e-13));
      }
    }
  }

  TEST_CASE("composite rule honours breakpoints") {
    const double bp[] = {0.3};
    const Rule r = composite_gauss(0.0, 1.0, bp, {.order = 8});
    // kink at 0.3 is integrated exactly once the panel is split there
    const double v = r.integrate([](double x) { return std::abs(x - 0.3); });
    CHECK(v == doctest::Approx(0.5 * 0.09 + 0.5 * 0.49).epsilon(1e-14));
  }

  TEST_CASE("graded rule handles sqrt endpoint") {
    const Rule r = composite_gauss(0.0, 1.0, {}, {.order = 16, .max_panel = 0.5, .graded_left = true});
    CHECK(r.integrate([](double x) { return std::sqrt(x); }) == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  }

  TEST_CASE("adaptive simpson") {
    const auto res = adaptive_simpson([](double x) { return std::sin(x); }, 0.0, M_PI, 1e-10);
    CHECK(res.converged);
    CHECK(res.value == doctest::Approx(2.0).epsilon(1e-9));
  }
}
