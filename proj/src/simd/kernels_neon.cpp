#include <arm_neon.h>

#include <cmath>

#include "fedsel/simd.hpp"

namespace fedsel::simd::detail {
namespace {

double dot_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  for (; i + 2 <= n; i += 2) acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void scale_neon(double a, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vmulq_f64(va, vld1q_f64(y + i)));
  for (; i < n; ++i) y[i] *= a;
}

void ucb_indices_neon(const double* means, const std::uint32_t* pulls, std::size_t n, double log_t, double mu,
                      double* out) {
  const float64x2_t vlog = vdupq_n_f64(log_t);
  const float64x2_t vmu = vdupq_n_f64(mu);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t p = vcvtq_f64_u64(vmovl_u32(vld1_u32(pulls + i)));
    const float64x2_t bonus = vmulq_f64(vmu, vsqrtq_f64(vdivq_f64(vlog, p)));
    vst1q_f64(out + i, vaddq_f64(vld1q_f64(means + i), bonus));
  }
  for (; i < n; ++i) out[i] = means[i] + mu * std::sqrt(log_t / static_cast<double>(pulls[i]));
}

std::size_t argmax_neon(const double* v, std::size_t n) {
  if (n < 4) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (v[i] > v[best]) best = i;
    return best;
  }
  float64x2_t vmax = vld1q_f64(v);
  std::size_t i = 2;
  for (; i + 2 <= n; i += 2) vmax = vmaxq_f64(vmax, vld1q_f64(v + i));
  double m = vmaxvq_f64(vmax);
  for (; i < n; ++i) m = v[i] > m ? v[i] : m;
  for (i = 0; i < n; ++i)
    if (v[i] == m) return i;
  return 0;
}

}  // namespace

const KernelTable neon_table{dot_neon, axpy_neon, scale_neon, ucb_indices_neon, argmax_neon};

}  // namespace fedsel::simd::detail
