#include <atomic>
#include <cstdlib>
#include <string>

#include "fedsel/error.hpp"
#include "fedsel/simd.hpp"

namespace fedsel::simd {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(FEDSEL_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend best_backend() noexcept {
  if (cpu_has_avx2()) return Backend::avx2;
#if defined(FEDSEL_HAVE_NEON)
  return Backend::neon;
#else
  return Backend::scalar;
#endif
}

Backend initial_backend() {
  const char* env = std::getenv("FEDSEL_SIMD");
  if (env == nullptr) return best_backend();
  const std::string v(env);
  if (v == "scalar") return Backend::scalar;
  if (v == "avx2" && backend_supported(Backend::avx2)) return Backend::avx2;
  if (v == "neon" && backend_supported(Backend::neon)) return Backend::neon;
  return best_backend();
}

std::atomic<Backend>& active() {
  static std::atomic<Backend> backend{initial_backend()};
  return backend;
}

const KernelTable& current() { return kernels(active().load(std::memory_order_relaxed)); }

}  // namespace

bool backend_supported(Backend b) noexcept {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
      return cpu_has_avx2();
    case Backend::neon:
#if defined(FEDSEL_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

std::string_view backend_name(Backend b) noexcept {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
    case Backend::neon:
      return "neon";
  }
  return "unknown";
}

const KernelTable& kernels(Backend b) {
  if (!backend_supported(b)) throw ConfigError("SIMD backend not available: " + std::string(backend_name(b)));
  switch (b) {
#if defined(FEDSEL_HAVE_AVX2)
    case Backend::avx2:
      return detail::avx2_table;
#endif
#if defined(FEDSEL_HAVE_NEON)
    case Backend::neon:
      return detail::neon_table;
#endif
    default:
      return detail::scalar_table;
  }
}

Backend active_backend() noexcept { return active().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
  if (!backend_supported(b)) throw ConfigError("SIMD backend not available: " + std::string(backend_name(b)));
  active().store(b, std::memory_order_relaxed);
}

double dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("dot: length mismatch");
  return current().dot(x.data(), y.data(), x.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw DomainError("axpy: length mismatch");
  current().axpy(a, x.data(), y.data(), x.size());
}

void scale(double a, std::span<double> y) { current().scale(a, y.data(), y.size()); }

void ucb_indices(std::span<const double> means, std::span<const std::uint32_t> pulls, double log_t, double mu,
                 std::span<double> out) {
  if (means.size() != pulls.size() || means.size() != out.size()) throw DomainError("ucb_indices: length mismatch");
  current().ucb_indices(means.data(), pulls.data(), means.size(), log_t, mu, out.data());
}

std::size_t argmax(std::span<const double> v) {
  if (v.empty()) throw DomainError("argmax: empty input");
  return current().argmax(v.data(), v.size());
}

}  // namespace fedsel::simd
