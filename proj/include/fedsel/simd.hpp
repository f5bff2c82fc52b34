#pragma once

// Data-parallel inner loops shared by training, aggregation and UCB arm scans.
//
// Every kernel has a scalar reference implementation and, where the target
// supports it, an AVX2 (x86-64) or NEON (AArch64) variant. The variant is picked
// once at startup from the CPU features and can be overridden with the
// FEDSEL_SIMD environment variable (scalar | avx2 | neon | auto) or set_backend().
//
// ucb_indices and argmax are bit-identical across backends. dot and axpy use a
// different summation order / fused multiply-add in the vector variants, so
// they agree with the scalar reference only to rounding.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace fedsel::simd {

enum class Backend { scalar, avx2, neon };

struct KernelTable {
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // y *= a
  void (*scale)(double a, double* y, std::size_t n);
  // out[i] = means[i] + mu * sqrt(log_t / pulls[i]); pulls[i] >= 1
  void (*ucb_indices)(const double* means, const std::uint32_t* pulls, std::size_t n, double log_t,
                      double mu, double* out);
  // first index of the maximum; n >= 1, no NaN
  std::size_t (*argmax)(const double* v, std::size_t n);
};

bool backend_supported(Backend b) noexcept;
std::string_view backend_name(Backend b) noexcept;

// Throws ConfigError for an unsupported backend.
const KernelTable& kernels(Backend b);

Backend active_backend() noexcept;
void set_backend(Backend b);

// Convenience wrappers over the active backend.
double dot(std::span<const double> x, std::span<const double> y);
void axpy(double a, std::span<const double> x, std::span<double> y);
void scale(double a, std::span<double> y);
void ucb_indices(std::span<const double> means, std::span<const std::uint32_t> pulls, double log_t, double mu,
                 std::span<double> out);
std::size_t argmax(std::span<const double> v);

namespace detail {
extern const KernelTable scalar_table;
#if defined(FEDSEL_HAVE_AVX2)
extern const KernelTable avx2_table;
#endif
#if defined(FEDSEL_HAVE_NEON)
extern const KernelTable neon_table;
#endif
}  // namespace detail

}  // namespace fedsel::simd
