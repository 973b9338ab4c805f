#pragma once

// Data-parallel kernels behind every quadrature sum in the library.
//
// Each kernel has a scalar reference implementation (namespace scalar) and,
// on x86-64, an AVX2+FMA variant (namespace avx2). The unqualified entry
// points dispatch once at first use based on the running CPU. Results of the
// two variants agree to a few ulps; tests/test_kernels.cpp pins that.

#include <cstddef>
#include <span>
#include <string_view>

namespace fluctruin::simd {

enum class Isa { Scalar, Avx2 };

/// Σ w[i] * exp(slope * x[i] + offset)
double sum_exp_affine(std::span<const double> w, std::span<const double> x,
                      double slope, double offset) noexcept;

/// Σ w[i] * exp(e[i])
double sum_exp(std::span<const double> w, std::span<const double> e) noexcept;

/// out[i] = w[i] * exp(e[i])
void weighted_exp(std::span<const double> w, std::span<const double> e,
                  std::span<double> out) noexcept;

/// out[i] = exp(x[i])
void exp_array(std::span<const double> x, std::span<double> out) noexcept;

Isa active_isa() noexcept;
bool isa_available(Isa isa) noexcept;
/// Pin the dispatch target (tests, benchmarking). Returns false if the
/// requested ISA is not supported on this CPU; the active ISA is unchanged.
bool set_isa(Isa isa) noexcept;
std::string_view isa_name(Isa isa) noexcept;

namespace scalar {
double sum_exp_affine(const double* w, const double* x, std::size_t n,
                      double slope, double offset) noexcept;
double sum_exp(const double* w, const double* e, std::size_t n) noexcept;
void weighted_exp(const double* w, const double* e, double* out,
                  std::size_t n) noexcept;
void exp_array(const double* x, double* out, std::size_t n) noexcept;
}  // namespace scalar

#if defined(FLUCTRUIN_HAVE_AVX2)
namespace avx2 {
double sum_exp_affine(const double* w, const double* x, std::size_t n,
                      double slope, double offset) noexcept;
double sum_exp(const double* w, const double* e, std::size_t n) noexcept;
void weighted_exp(const double* w, const double* e, double* out,
                  std::size_t n) noexcept;
void exp_array(const double* x, double* out, std::size_t n) noexcept;
}  // namespace avx2
#endif

}  // namespace fluctruin::simd
