#include "fluctruin/simd/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace fluctruin::simd::avx2 {
namespace {

// Cephes-style exp: range reduction by ln2, (3,3) Pade on [-ln2/2, ln2/2],
// scale by 2^n applied in two halves so that n = 1024 and gradual underflow
// are both handled without touching the exponent field directly.
constexpr double kMaxLog = 7.09782712893383996843e2;
constexpr double kMinLog = -7.451332191019412076235e2;
constexpr double kLog2e = 1.4426950408889634073599;
constexpr double kC1 = 6.93145751953125e-1;
constexpr double kC2 = 1.42860682030941723212e-6;
constexpr double kMagic = 6755399441055744.0;  // 2^52 + 2^51

inline __m256d pow2_int(__m256d k) {
  // k is an integral double in [-1022, 1023]
  const __m256d biased = _mm256_add_pd(k, _mm256_set1_pd(1023.0 + kMagic));
  __m256i bits = _mm256_sub_epi64(_mm256_castpd_si256(biased),
                                  _mm256_castpd_si256(_mm256_set1_pd(kMagic)));
  bits = _mm256_slli_epi64(bits, 52);
  return _mm256_castsi256_pd(bits);
}

inline __m256d exp_pd(__m256d x) {
  const __m256d hi_mask = _mm256_cmp_pd(x, _mm256_set1_pd(kMaxLog), _CMP_GT_OQ);
  const __m256d lo_mask = _mm256_cmp_pd(x, _mm256_set1_pd(kMinLog), _CMP_LT_OQ);
  const __m256d nan_mask = _mm256_cmp_pd(x, x, _CMP_UNORD_Q);
  __m256d xc = _mm256_min_pd(_mm256_max_pd(x, _mm256_set1_pd(kMinLog)),
                             _mm256_set1_pd(kMaxLog));

  const __m256d fx = _mm256_round_pd(
      _mm256_fmadd_pd(xc, _mm256_set1_pd(kLog2e), _mm256_set1_pd(0.5)),
      _MM_FROUND_TO_NEG_INF | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(fx, _mm256_set1_pd(kC1), xc);
  r = _mm256_fnmadd_pd(fx, _mm256_set1_pd(kC2), r);

  const __m256d rr = _mm256_mul_pd(r, r);
  __m256d p = _mm256_set1_pd(1.26177193074810590878e-4);
  p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(3.02994407707441961300e-2));
  p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(9.99999999999999999910e-1));
  p = _mm256_mul_pd(p, r);
  __m256d q = _mm256_set1_pd(3.00198505138664455042e-6);
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.52448340349684104192e-3));
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.27265548208155028766e-1));
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.00000000000000000009e0));
  __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  e = _mm256_fmadd_pd(e, _mm256_set1_pd(2.0), _mm256_set1_pd(1.0));

  const __m256d n1 = _mm256_round_pd(_mm256_mul_pd(fx, _mm256_set1_pd(0.5)),
                                     _MM_FROUND_TO_NEG_INF | _MM_FROUND_NO_EXC);
  const __m256d n2 = _mm256_sub_pd(fx, n1);
  e = _mm256_mul_pd(_mm256_mul_pd(e, pow2_int(n1)), pow2_int(n2));

  e = _mm256_blendv_pd(e, _mm256_set1_pd(HUGE_VAL), hi_mask);
  e = _mm256_blendv_pd(e, _mm256_setzero_pd(), lo_mask);
  e = _mm256_blendv_pd(e, x, nan_mask);
  return e;
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

double sum_exp_affine(const double* w, const double* x, std::size_t n,
                      double slope, double offset) noexcept {
  const __m256d vs = _mm256_set1_pd(slope);
  const __m256d vo = _mm256_set1_pd(offset);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d arg = _mm256_fmadd_pd(vs, _mm256_loadu_pd(x + i), vo);
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), exp_pd(arg), acc);
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += w[i] * std::exp(std::fma(slope, x[i], offset));
  return hsum(acc) + tail;
}

double sum_exp(const double* w, const double* e, std::size_t n) noexcept {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), exp_pd(_mm256_loadu_pd(e + i)), acc);
  double tail = 0.0;
  for (; i < n; ++i) tail += w[i] * std::exp(e[i]);
  return hsum(acc) + tail;
}

void weighted_exp(const double* w, const double* e, double* out,
                  std::size_t n) noexcept {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(w + i),
                                            exp_pd(_mm256_loadu_pd(e + i))));
  for (; i < n; ++i) out[i] = w[i] * std::exp(e[i]);
}

void exp_array(const double* x, double* out, std::size_t n) noexcept {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, exp_pd(_mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = std::exp(x[i]);
}

}  // namespace fluctruin::simd::avx2
