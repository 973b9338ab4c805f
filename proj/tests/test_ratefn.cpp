#include <doctest.h>

#include "fluctruin/optimize.hpp"
#include "fluctruin/population_action.hpp"
#include "fluctruin/ratefn.hpp"

#include <cmath>

using namespace fluctruin;

namespace {
ModelParams top() {
  return ModelParams(1.0, 1.0, 3.0, 3.0, Distribution::exponential(1.5), Distribution::exponential(1.0));
}
ModelParams bottom() {
  return ModelParams(3.0, 0.0, 3.0, 3.0, Distribution::exponential(1.5), Distribution::uniform(0.0, 1.0));
}

// closed form for exponential(alpha) claims: x L'(theta) = u
double k_exponential(double alpha, double nu, double r, double x, double u) {
  const double th = alpha - std::sqrt(nu * alpha * x / (u + r * x));
  return th * u - x * (-r * th + nu * (alpha / (alpha - th) - 1.0));
}

// nested golden-section search of the concave dual objective
double legendre_oracle(const ModelParams& p, double t, double f, double g) {
  const OnePointCumulant N(p, t);
  const auto inner = [&](double th) {
    const auto best = opt::golden_section_min([&](double w) { return -(w * f + th * g - N.value(w, th)); }, -8.0, 8.0, 1e-10, 400);
    return best.value;
  };
  return -opt::golden_section_min(inner, -6.0, std::min(6.0, p.theta_cap()), 1e-10, 400).value;
}
}  // namespace

TEST_SUITE("ratefn") {
  TEST_CASE("k_local closed form for exponential claims") {
    const auto p = top();
    for (double x : {0.3, 1.0, 2.5})
      for (double u : {-2.0, -0.5, 0.0, 1.0, 4.0}) {
        if (u <= -p.r * x) continue;
        CHECK(k_local(p, x, u) == doctest::Approx(k_exponential(1.5, 3.0, 3.0, x, u)).epsilon(1e-10));
      }
  }

  TEST_CASE("k_local edge cases") {
    const auto p = top();
    CHECK(k_local(p, 0.0, 0.0) == 0.0);
    CHECK(std::isinf(k_local(p, 0.0, 1.0)));
    CHECK(std::isinf(k_local(p, 1.0, -3.5)));
    CHECK(k_local(p, 2.0, -6.0) == doctest::Approx(2.0 * 3.0));  // no claims at all
    for (double x : {0.5, 1.0, 2.0}) CHECK(k_local(p, x, -x) == 0.0);  // local mean (nu mbar - r) x
  }

  TEST_CASE("k_local derivatives") {
    const auto p = bottom();
    const double x = 1.3, u = 0.4, h = 1e-5;
    const auto k = k_local_derivs(p, x, u);
    CHECK(k.du == doctest::Approx((k_local(p, x, u + h) - k_local(p, x, u - h)) / (2 * h)).epsilon(1e-7));
    CHECK(k.dx == doctest::Approx((k_local(p, x + h, u) - k_local(p, x - h, u)) / (2 * h)).epsilon(1e-7));
    CHECK(k.duu == doctest::Approx((k_local_derivs(p, x, u + h).du - k_local_derivs(p, x, u - h).du) / (2 * h)).epsilon(1e-5));
    CHECK(k.dux == doctest::Approx((k_local_derivs(p, x + h, u).du - k_local_derivs(p, x - h, u).du) / (2 * h)).epsilon(1e-5));
    CHECK(k.dxx == doctest::Approx((k_local_derivs(p, x + h, u).dx - k_local_derivs(p, x - h, u).dx) / (2 * h)).epsilon(1e-5));
  }

  TEST_CASE("literal phi variant is not centred") {
    const auto p = top();
    CHECK(k_local(p, 1.0, -1.0, KVariant::LiteralPhi) == doctest::Approx(-1.0).epsilon(1e-9));
  }

  TEST_CASE("one-point rate against a nested search") {
    for (const auto& p : {top(), bottom()}) {
      for (auto [t, df, dg] : {std::tuple{1.0, 0.2, 0.5}, std::tuple{2.5, -0.3, 1.5}, std::tuple{3.5, 0.1, -0.8}}) {
        const double f = fluid_population(p, t) + df, g = fluid_claims(p, t) + dg;
        const auto r = rate_one_point(p, t, f, g);
        CHECK(r.converged);
        CHECK(r.value == doctest::Approx(legendre_oracle(p, t, f, g)).epsilon(1e-7));
      }
      CHECK(rate_one_point(p, 2.0, fluid_population(p, 2.0), fluid_claims(p, 2.0)).value == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("rate_multi at d = 1 equals rate_one_point") {
    const auto p = bottom();
    for (double t : {0.5, 2.0}) {
      const double f = fluid_population(p, t) * 1.2, g = fluid_claims(p, t) + 0.7;
      CHECK(rate_multi(p, TimeGrid({t}), {f}, {g}).value ==
            doctest::Approx(rate_one_point(p, t, f, g).value).epsilon(1e-8));
    }
  }

  TEST_CASE("rate_multi is zero on the fluid path and grows off it") {
    const auto p = bottom();
    const std::vector<double> ts = {0.5, 1.0, 2.0};
    std::vector<double> fs, gs;
    for (double t : ts) {
      fs.push_back(fluid_population(p, t));
      gs.push_back(fluid_claims(p, t));
    }
    CHECK(rate_multi(p, TimeGrid(ts), fs, gs).value == doctest::Approx(0.0).scale(1.0).epsilon(1e-8));
    gs[2] += 1.0;
    const double r1 = rate_multi(p, TimeGrid(ts), fs, gs).value;
    CHECK(r1 > 0.0);
    // a single-time marginal cannot cost more than the joint constraint
    CHECK(r1 >= rate_one_point(p, 2.0, fs[2], gs[2]).value - 1e-8);
  }

  TEST_CASE("population action") {
    const auto p = top();
    const auto times = PathGrid::uniform_times(3.0, 24);
    const std::vector<double> flat(times.size(), 1.0);
    CHECK(rate_f(p, PathGrid(times, flat, {})).value == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
    std::vector<double> bump = flat;
    for (std::size_t i = 1; i < bump.size(); ++i) bump[i] = 1.0 + 0.3 * std::sin(times[i]);
    const auto r = rate_f(p, PathGrid(times, bump, {}));
    CHECK(r.converged);
    CHECK(r.value > 0.0);
    // envelope gradient M^T y against a difference quotient
    const PopulationAction pa(p, times);
    const Eigen::VectorXd grad = pa.linear_map().transpose() * Eigen::Map<const Eigen::VectorXd>(r.omega.data(), r.omega.size());
    const std::size_t j = 7;
    const double h = 1e-5;
    auto up = bump, dn = bump;
    up[j] += h;
    dn[j] -= h;
    const double fd = (rate_f(p, PathGrid(times, up, {})).value - rate_f(p, PathGrid(times, dn, {})).value) / (2 * h);
    CHECK(grad[static_cast<Eigen::Index>(j - 1)] == doctest::Approx(fd).epsilon(1e-5));
    CHECK_THROWS(rate_f(p, PathGrid(times, std::vector<double>(times.size(), 2.0), {})));
  }

  TEST_CASE("population action of the fluid path vanishes with refinement") {
    const auto p = bottom();
    double prev = 1.0;
    for (std::size_t d : {8, 16, 32}) {
      const auto times = PathGrid::uniform_times(2.0, d);
      std::vector<double> f;
      for (double t : times) f.push_back(fluid_population(p, t));
      const double v = std::abs(rate_f(p, PathGrid(times, f, {})).value);
      CHECK(v < prev);
      prev = v;
    }
    CHECK(prev < 1e-3);
  }

  TEST_CASE("sample-path action of the fluid path") {
    const auto p = top();
    const auto times = PathGrid::uniform_times(2.0, 16);
    std::vector<double> f(times.size(), 1.0), g;
    for (double t : times) g.push_back(fluid_claims(p, t));
    const PathGrid path(times, f, g);
    CHECK(rate_g_given_f(p, path) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(rate_sample_path(p, path).value == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
    g.back() += 0.5;
    CHECK(rate_g_given_f(p, PathGrid(times, f, g)) > 0.0);
  }
}
