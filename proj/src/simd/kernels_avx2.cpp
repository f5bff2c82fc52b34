// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include <cmath>

#include "fedsel/simd.hpp"

namespace fedsel::simd::detail {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double hmax(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d m = _mm_max_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_max_sd(m, _mm_unpackhi_pd(m, m)));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scale_avx2(double a, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(y + i, _mm256_mul_pd(va, _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] *= a;
}

// No FMA here: mean + mu * sqrt(...) must round exactly like the scalar loop.
void ucb_indices_avx2(const double* means, const std::uint32_t* pulls, std::size_t n, double log_t, double mu,
                      double* out) {
  const __m256d vlog = _mm256_set1_pd(log_t);
  const __m256d vmu = _mm256_set1_pd(mu);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    // pulls < 2^31 in practice, so the signed conversion is exact.
    const __m128i p32 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(pulls + i));
    const __m256d p = _mm256_cvtepi32_pd(p32);
    const __m256d bonus = _mm256_mul_pd(vmu, _mm256_sqrt_pd(_mm256_div_pd(vlog, p)));
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(means + i), bonus));
  }
  for (; i < n; ++i) out[i] = means[i] + mu * std::sqrt(log_t / static_cast<double>(pulls[i]));
}

std::size_t argmax_avx2(const double* v, std::size_t n) {
  if (n < 8) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (v[i] > v[best]) best = i;
    return best;
  }
  __m256d vmax = _mm256_loadu_pd(v);
  std::size_t i = 4;
  for (; i + 4 <= n; i += 4) vmax = _mm256_max_pd(vmax, _mm256_loadu_pd(v + i));
  double m = hmax(vmax);
  for (; i < n; ++i) m = v[i] > m ? v[i] : m;

  const __m256d target = _mm256_set1_pd(m);
  i = 0;
  for (; i + 4 <= n; i += 4) {
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(_mm256_loadu_pd(v + i), target, _CMP_EQ_OQ));
    if (mask != 0) return i + static_cast<std::size_t>(__builtin_ctz(static_cast<unsigned>(mask)));
  }
  for (; i < n; ++i)
    if (v[i] == m) return i;
  return 0;
}

}  // namespace

const KernelTable avx2_table{dot_avx2, axpy_avx2, scale_avx2, ucb_indices_avx2, argmax_avx2};

}  // namespace fedsel::simd::detail
