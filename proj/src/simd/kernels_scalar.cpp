#include <cmath>

#include "fedsel/simd.hpp"

namespace fedsel::simd::detail {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_scalar(double a, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] *= a;
}

void ucb_indices_scalar(const double* means, const std::uint32_t* pulls, std::size_t n, double log_t, double mu,
                        double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = means[i] + mu * std::sqrt(log_t / static_cast<double>(pulls[i]));
  }
}

std::size_t argmax_scalar(const double* v, std::size_t n) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

}  // namespace

const KernelTable scalar_table{dot_scalar, axpy_scalar, scale_scalar, ucb_indices_scalar, argmax_scalar};

}  // namespace fedsel::simd::detail
