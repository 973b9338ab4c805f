#include "fluctruin/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace fluctruin::simd {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(FLUCTRUIN_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect() noexcept {
  // FLUCTRUIN_ISA=scalar forces the reference path
  if (const char* env = std::getenv("FLUCTRUIN_ISA"); env && std::strcmp(env, "scalar") == 0)
    return Isa::Scalar;
  return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& current() noexcept {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

bool isa_available(Isa isa) noexcept {
  return isa == Isa::Scalar || (isa == Isa::Avx2 && cpu_has_avx2());
}

bool set_isa(Isa isa) noexcept {
  if (!isa_available(isa)) return false;
  current().store(isa, std::memory_order_relaxed);
  return true;
}

std::string_view isa_name(Isa isa) noexcept {
  return isa == Isa::Avx2 ? "avx2" : "scalar";
}

double sum_exp_affine(std::span<const double> w, std::span<const double> x,
                      double slope, double offset) noexcept {
#if defined(FLUCTRUIN_HAVE_AVX2)
  if (active_isa() == Isa::Avx2)
    return avx2::sum_exp_affine(w.data(), x.data(), w.size(), slope, offset);
#endif
  return scalar::sum_exp_affine(w.data(), x.data(), w.size(), slope, offset);
}

double sum_exp(std::span<const double> w, std::span<const double> e) noexcept {
#if defined(FLUCTRUIN_HAVE_AVX2)
  if (active_isa() == Isa::Avx2) return avx2::sum_exp(w.data(), e.data(), w.size());
#endif
  return scalar::sum_exp(w.data(), e.data(), w.size());
}

void weighted_exp(std::span<const double> w, std::span<const double> e,
                  std::span<double> out) noexcept {
#if defined(FLUCTRUIN_HAVE_AVX2)
  if (active_isa() == Isa::Avx2) {
    avx2::weighted_exp(w.data(), e.data(), out.data(), w.size());
    return;
  }
#endif
  scalar::weighted_exp(w.data(), e.data(), out.data(), w.size());
}

void exp_array(std::span<const double> x, std::span<double> out) noexcept {
#if defined(FLUCTRUIN_HAVE_AVX2)
  if (active_isa() == Isa::Avx2) {
    avx2::exp_array(x.data(), out.data(), x.size());
    return;
  }
#endif
  scalar::exp_array(x.data(), out.data(), x.size());
}

}  // namespace fluctruin::simd
