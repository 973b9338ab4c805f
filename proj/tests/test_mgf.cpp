#include <doctest.h>

#include "fluctruin/mgf.hpp"
#include "fluctruin/optimize.hpp"

#include <cmath>
#include <random>

using namespace fluctruin;

namespace {
ModelParams top() {
  return ModelParams(1.0, 1.0, 3.0, 3.0, Distribution::exponential(1.5), Distribution::exponential(1.0));
}
ModelParams bottom() {
  return ModelParams(3.0, 0.0, 3.0, 3.0, Distribution::exponential(1.5), Distribution::uniform(0.0, 1.0));
}
ModelParams gamma_row() {
  return ModelParams(5.0, 1.0, 3.0, 3.0, Distribution::exponential(1.5), Distribution::gamma(2.0, 4.0));
}
}  // namespace

TEST_SUITE("mgf") {
  TEST_CASE("normalisation at zero duals") {
    for (const auto& p : {top(), bottom(), gamma_row()}) {
      CHECK(m_minus_one(p, 2.0, 0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-13));
      CHECK(log_m_plus_one(p, 2.0, 0.0, 0.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-13));
      const TimeGrid g({0.5, 1.7, 3.0});
      CHECK(m_minus_multi(p, g, DualVector::zeros(3)) == doctest::Approx(1.0).epsilon(1e-13));
      CHECK(log_m_plus_multi(p, g, DualVector::zeros(3)) == doctest::Approx(0.0).scale(1.0).epsilon(1e-13));
    }
  }

  TEST_CASE("theta = 0 reduces to population counts") {
    // surviving initial clients are binomial, arrivals still present Poisson
    const auto p = bottom();
    const double t = 0.6, w = 0.4;
    const double stay = p.residual.tail(t);
    CHECK(m_minus_one(p, t, w, 0.0) == doctest::Approx(1.0 - stay + std::exp(w) * stay).epsilon(1e-12));
    const double present = p.lambda * (p.sojourn.stop_loss(0.0) - p.sojourn.stop_loss(t));
    CHECK(log_m_plus_one(p, t, w, 0.0) == doctest::Approx((std::exp(w) - 1.0) * present).epsilon(1e-12));
  }

  TEST_CASE("multi-point at d = 1 equals one-point") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (const auto& p : {top(), bottom(), gamma_row()}) {
      for (int i = 0; i < 100; ++i) {
        const double t = 0.1 + 4.9 * U(rng), w = 2.0 * U(rng) - 1.0, th = -1.0 + 2.0 * U(rng);
        const TimeGrid g({t});
        const DualVector d({w}, {th});
        CHECK(m_minus_multi(p, g, d) == doctest::Approx(m_minus_one(p, t, w, th)).epsilon(1e-10));
        CHECK(log_m_plus_multi(p, g, d) == doctest::Approx(log_m_plus_one(p, t, w, th)).epsilon(1e-10));
      }
    }
  }

  TEST_CASE("cumulant gradient is the fluid mean and matches differences") {
    for (const auto& p : {top(), bottom(), gamma_row()}) {
      const double t = 2.3;
      const OnePointCumulant N(p, t);
      const auto z = N.eval(0.0, 0.0);
      CHECK(z.grad[0] == doctest::Approx(fluid_population(p, t)).epsilon(1e-10));
      CHECK(z.grad[1] == doctest::Approx(fluid_claims(p, t)).epsilon(1e-10));
      const double w = 0.3, th = 0.2, h = 1e-5;
      const auto e = N.eval(w, th);
      CHECK(e.grad[0] == doctest::Approx((N.value(w + h, th) - N.value(w - h, th)) / (2 * h)).epsilon(1e-7));
      CHECK(e.grad[1] == doctest::Approx((N.value(w, th + h) - N.value(w, th - h)) / (2 * h)).epsilon(1e-7));
      const auto ep = N.eval(w, th + h), em = N.eval(w, th - h);
      CHECK(e.hess(1, 1) == doctest::Approx((ep.grad[1] - em.grad[1]) / (2 * h)).epsilon(1e-6));
      CHECK(e.hess(0, 1) == doctest::Approx((ep.grad[0] - em.grad[0]) / (2 * h)).epsilon(1e-6));
      CHECK(N.value(w, th) == doctest::Approx(log_n(p, TimeGrid({t}), DualVector({w}, {th}))).epsilon(1e-12));
    }
  }

  TEST_CASE("two-point marginal derivatives recover the fluid path") {
    const auto p = bottom();
    const TimeGrid g({0.7, 2.0});
    const auto f = [&](double x) { return log_n(p, g, DualVector({x, 0.0}, {0.0, 0.0})); };
    const auto gg = [&](double x) { return log_n(p, g, DualVector({0.0, 0.0}, {x, 0.0})); };
    CHECK(opt::richardson_derivative(f, 0.0, 1e-3) == doctest::Approx(fluid_population(p, 0.7)).epsilon(1e-9));
    CHECK(opt::richardson_derivative(gg, 0.0, 1e-3) == doctest::Approx(fluid_claims(p, 0.7)).epsilon(1e-9));
  }

  TEST_CASE("outside the domain") {
    const auto p = top();
    CHECK(std::isinf(log_n(p, TimeGrid({1.0}), DualVector({0.0}, {1.6}))));
    CHECK(std::isinf(OnePointCumulant(p, 1.0).value(0.0, 1.6)));
  }

  TEST_CASE("plus reading variants differ only by lambda (t - 1)") {
    const auto p = top();
    const double a = log_m_plus_one(p, 2.5, 0.2, 0.1, PlusReading::MinusT);
    const double b = log_m_plus_one(p, 2.5, 0.2, 0.1, PlusReading::MinusOne);
    CHECK(b - a == doctest::Approx(p.lambda * (2.5 - 1.0)).epsilon(1e-12));
  }

  TEST_CASE("limits: zero duals and first-order convergence of the embedding") {
    const auto w = [](double s) { return 0.1 * s; };
    const auto th = [](double s) { return 0.05 + 0.02 * s; };
    for (const auto& p : {top(), bottom()}) {
      const double T = 3.0;
      const auto zero = DualFunction::sample(T, 16, [](double) { return 0.0; }, [](double) { return 0.0; });
      CHECK(m_minus_limit(p, zero) == doctest::Approx(1.0).epsilon(1e-13));
      CHECK(log_m_plus_limit(p, zero) == doctest::Approx(0.0).scale(1.0).epsilon(1e-13));
      const auto df = DualFunction::sample(T, 2048, w, th);
      const double ref = log_m_plus_limit(p, df);
      double prev = 0.0;
      for (int d : {32, 64, 128, 256}) {
        const auto [g, dv] = embed_duals(T, static_cast<std::size_t>(d), w, th);
        const double err = std::abs(log_m_plus_multi(p, g, dv) - ref);
        if (d > 32) CHECK(prev / err == doctest::Approx(2.0).epsilon(0.1));
        prev = err;
      }
    }
  }

  TEST_CASE("psi table interpolates the running integral") {
    const auto p = top();
    const auto df = DualFunction::sample(2.0, 64, [](double s) { return 0.2 * s; }, [](double s) { return 0.1 * std::cos(s); });
    const double u = 1.37;
    const double ref = df.Omega(u) + quad::adaptive_simpson([&](double s) { return log_phi(p, df.Theta(s)); }, 0.0, u, 1e-12, 30).value;
    CHECK(psi(p, df, u) == doctest::Approx(ref).epsilon(1e-7));
  }
}
