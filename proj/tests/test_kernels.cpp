#include <doctest.h>

#include "fluctruin/simd/kernels.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace fluctruin::simd;

namespace {

struct Data {
  std::vector<double> w, x;
};

Data make_data(std::size_t n, std::mt19937_64& rng, double spread) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Data d;
  for (std::size_t i = 0; i < n; ++i) {
    d.w.push_back(U(rng) + 1.5);
    d.x.push_back(spread * U(rng));
  }
  return d;
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("scalar reference agrees with libm") {
    std::mt19937_64 rng(11);
    const Data d = make_data(37, rng, 30.0);
    double ref = 0.0;
    for (std::size_t i = 0; i < d.w.size(); ++i) ref += d.w[i] * std::exp(0.7 * d.x[i] - 2.0);
    CHECK(scalar::sum_exp_affine(d.w.data(), d.x.data(), d.w.size(), 0.7, -2.0) == doctest::Approx(ref).epsilon(1e-14));
  }

  TEST_CASE("avx2 matches scalar") {
    if (!isa_available(Isa::Avx2)) {
      MESSAGE("AVX2 not available on this CPU; equivalence test skipped");
      return;
    }
#if defined(FLUCTRUIN_HAVE_AVX2)
    std::mt19937_64 rng(5);
    for (std::size_t n : {0, 1, 3, 4, 5, 7, 8, 15, 16, 17, 64, 129, 1000}) {
      for (double spread : {1.0, 50.0, 700.0}) {
        const Data d = make_data(n, rng, spread);
        const double a = scalar::sum_exp_affine(d.w.data(), d.x.data(), n, 0.9, -1.0);
        const double b = avx2::sum_exp_affine(d.w.data(), d.x.data(), n, 0.9, -1.0);
        CHECK(b == doctest::Approx(a).epsilon(1e-13));
        CHECK(avx2::sum_exp(d.w.data(), d.x.data(), n) ==
              doctest::Approx(scalar::sum_exp(d.w.data(), d.x.data(), n)).epsilon(1e-13));
        std::vector<double> o1(n), o2(n), e1(n), e2(n);
        scalar::weighted_exp(d.w.data(), d.x.data(), o1.data(), n);
        avx2::weighted_exp(d.w.data(), d.x.data(), o2.data(), n);
        scalar::exp_array(d.x.data(), e1.data(), n);
        avx2::exp_array(d.x.data(), e2.data(), n);
        for (std::size_t i = 0; i < n; ++i) {
          CHECK(o2[i] == doctest::Approx(o1[i]).epsilon(1e-14));
          CHECK(e2[i] == doctest::Approx(e1[i]).epsilon(1e-14));
        }
      }
    }
#endif
  }

  TEST_CASE("overflow and underflow edges") {
    const std::vector<double> x = {-800.0, -745.2, 0.0, 709.0, 710.0, 800.0};
    std::vector<double> a(x.size()), b(x.size());
    scalar::exp_array(x.data(), a.data(), x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (std::isinf(std::exp(x[i]))) CHECK(std::isinf(a[i]));
      else CHECK(a[i] == doctest::Approx(std::exp(x[i])).epsilon(1e-14));
    }
    if (isa_available(Isa::Avx2)) {
#if defined(FLUCTRUIN_HAVE_AVX2)
      avx2::exp_array(x.data(), b.data(), x.size());
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::isinf(a[i])) CHECK(std::isinf(b[i]));
        else CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-14));
      }
#endif
    }
  }

  TEST_CASE("dispatch can be pinned") {
    const Isa before = active_isa();
    CHECK(set_isa(Isa::Scalar));
    CHECK(active_isa() == Isa::Scalar);
    const std::vector<double> w = {1.0, 2.0}, x = {0.0, 1.0};
    CHECK(sum_exp(w, x) == doctest::Approx(1.0 + 2.0 * std::exp(1.0)));
    set_isa(before);
    CHECK(isa_name(Isa::Avx2) == "avx2");
  }
}
