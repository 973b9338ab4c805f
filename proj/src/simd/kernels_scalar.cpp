#include "fluctruin/simd/kernels.hpp"

#include <cmath>

namespace fluctruin::simd::scalar {

double sum_exp_affine(const double* w, const double* x, std::size_t n,
                      double slope, double offset) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * std::exp(std::fma(slope, x[i], offset));
  return acc;
}

double sum_exp(const double* w, const double* e, std::size_t n) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * std::exp(e[i]);
  return acc;
}

void weighted_exp(const double* w, const double* e, double* out,
                  std::size_t n) noexcept {
  for (std::size_t i = 0; i < n; ++i) out[i] = w[i] * std::exp(e[i]);
}

void exp_array(const double* x, double* out, std::size_t n) noexcept {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(x[i]);
}

}  // namespace fluctruin::simd::scalar
