// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

// Compiled with -mavx2 -mfma. Only reached after a runtime CPU check.

#include <immintrin.h>

#include <cmath>

#include "sdsmi/simd/kernels.hpp"

namespace sdsmi::simd {
namespace {

// exp via Cody-Waite reduction x = n ln2 + r, |r| <= ln2/2, then a
// degree-12 Taylor polynomial in r and exponent-bit scaling by 2^n.
// Results below the normal range are flushed to zero.
inline __m256d exp4(__m256d x) {
  const __m256d lo = _mm256_set1_pd(-708.3);
  const __m256d hi = _mm256_set1_pd(709.7);
  const __m256d under = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
  const __m256d over = _mm256_cmp_pd(x, hi, _CMP_GT_OQ);
  x = _mm256_min_pd(_mm256_max_pd(x, lo), hi);

  const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
  const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);

  static constexpr double kInvFact[13] = {1.0,
                                          1.0,
                                          1.0 / 2,
                                          1.0 / 6,
                                          1.0 / 24,
                                          1.0 / 120,
                                          1.0 / 720,
                                          1.0 / 5040,
                                          1.0 / 40320,
                                          1.0 / 362880,
                                          1.0 / 3628800,
                                          1.0 / 39916800,
                                          1.0 / 479001600};
  __m256d p = _mm256_set1_pd(kInvFact[12]);
  for (int k = 11; k >= 0; --k) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(kInvFact[k]));

  const __m128i n32 = _mm256_cvtpd_epi32(n);
  __m256i e = _mm256_cvtepi32_epi64(n32);
  e = _mm256_add_epi64(e, _mm256_set1_epi64x(1023));
  e = _mm256_slli_epi64(e, 52);
  __m256d y = _mm256_mul_pd(p, _mm256_castsi256_pd(e));
  y = _mm256_andnot_pd(under, y);
  y = _mm256_blendv_pd(y, _mm256_set1_pd(HUGE_VAL), over);
  return y;
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double gauss_dot_avx2(double u0, double du, double inv_two_w2, const double* w,
                      std::size_t n) {
  const __m256d vdu = _mm256_set1_pd(du);
  const __m256d vneg = _mm256_set1_pd(-inv_two_w2);
  __m256d kk = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
  const __m256d four = _mm256_set1_pd(4.0);
  const __m256d vu0 = _mm256_set1_pd(u0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d u = _mm256_fmadd_pd(kk, vdu, vu0);
    const __m256d e = exp4(_mm256_mul_pd(_mm256_mul_pd(u, u), vneg));
    acc = _mm256_fmadd_pd(e, _mm256_loadu_pd(w + k), acc);
    kk = _mm256_add_pd(kk, four);
  }
  double s = hsum(acc);
  for (; k < n; ++k) {
    const double u = u0 + static_cast<double>(k) * du;
    s += std::exp(-u * u * inv_two_w2) * w[k];
  }
  return s;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), a0);
    a1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k + 4), _mm256_loadu_pd(b + k + 4), a1);
  }
  for (; k + 4 <= n; k += 4)
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), a0);
  double s = hsum(_mm256_add_pd(a0, a1));
  for (; k < n; ++k) s += a[k] * b[k];
  return s;
}

void matvec_avx2(const double* k, std::size_t rows, std::size_t cols, const double* x,
                 double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_avx2(k + r * cols, x, cols);
}

void vexp_avx2(const double* x, double* y, std::size_t n) {
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) _mm256_storeu_pd(y + k, exp4(_mm256_loadu_pd(x + k)));
  for (; k < n; ++k) y[k] = std::exp(x[k]);
}

inline double stage_node(const ExplicitStage& s, std::size_t i, double left, double right) {
  const double p = s.psi[i];
  const double reaction = -s.b[i] * p - s.half_sigma[i] * p * s.quad[i];
  const double transport = s.g[i] * (right - left) * s.inv_two_dx;
  const double lap = (right - 2.0 * p + left) * s.inv_dx2;
  return p + s.dt * reaction + transport + s.diff_weight * s.dt * s.half_a[i] * lap;
}

void explicit_stage_avx2(const ExplicitStage& s) {
  const std::size_t n = s.psi.size();
  if (n < 6) {
    scalar_kernels().explicit_stage(s);
    return;
  }
  s.out[0] = stage_node(s, 0, s.psi[1], s.psi[1]);
  const __m256d dt = _mm256_set1_pd(s.dt);
  const __m256d i2dx = _mm256_set1_pd(s.inv_two_dx);
  const __m256d idx2 = _mm256_set1_pd(s.inv_dx2);
  const __m256d dw = _mm256_set1_pd(s.diff_weight * s.dt);
  const __m256d two = _mm256_set1_pd(2.0);
  std::size_t i = 1;
  for (; i + 4 < n; i += 4) {
    const __m256d p = _mm256_loadu_pd(&s.psi[i]);
    const __m256d l = _mm256_loadu_pd(&s.psi[i - 1]);
    const __m256d r = _mm256_loadu_pd(&s.psi[i + 1]);
    const __m256d b = _mm256_loadu_pd(&s.b[i]);
    const __m256d hs = _mm256_loadu_pd(&s.half_sigma[i]);
    const __m256d q = _mm256_loadu_pd(&s.quad[i]);
    const __m256d g = _mm256_loadu_pd(&s.g[i]);
    const __m256d ha = _mm256_loadu_pd(&s.half_a[i]);
    const __m256d reaction =
        _mm256_sub_pd(_mm256_setzero_pd(),
                      _mm256_add_pd(_mm256_mul_pd(b, p), _mm256_mul_pd(_mm256_mul_pd(hs, p), q)));
    const __m256d transport = _mm256_mul_pd(_mm256_mul_pd(g, _mm256_sub_pd(r, l)), i2dx);
    const __m256d lap = _mm256_mul_pd(
        _mm256_add_pd(_mm256_sub_pd(r, _mm256_mul_pd(two, p)), l), idx2);
    __m256d out = _mm256_add_pd(p, _mm256_mul_pd(dt, reaction));
    out = _mm256_add_pd(out, transport);
    out = _mm256_add_pd(out, _mm256_mul_pd(_mm256_mul_pd(dw, ha), lap));
    _mm256_storeu_pd(&s.out[i], out);
  }
  for (; i + 1 < n; ++i) s.out[i] = stage_node(s, i, s.psi[i - 1], s.psi[i + 1]);
  s.out[n - 1] = stage_node(s, n - 1, s.psi[n - 2], s.psi[n - 2]);
}

constexpr KernelTable kAvx2{gauss_dot_avx2, dot_avx2, matvec_avx2, vexp_avx2,
                            explicit_stage_avx2};

}  // namespace

const KernelTable& avx2_kernels() noexcept { return kAvx2; }

}  // namespace sdsmi::simd
