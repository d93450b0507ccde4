#include <cstdlib>
#include <stdexcept>
#include <string>

#include "variants.hpp"

namespace itreg::simd {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa select_isa() {
  if (const char* pinned = std::getenv("ITREG_SIMD")) {
    const std::string name(pinned);
    if (name == "scalar") return Isa::scalar;
    if (name == "avx2" && isa_available(Isa::avx2)) return Isa::avx2;
  }
  return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("simd kernel: mismatched span lengths");
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) {
  if (isa == Isa::scalar) return true;
  static const bool avx2 = detail::avx2_table() != nullptr && cpu_has_avx2();
  return avx2;
}

Isa active_isa() {
  static const Isa isa = select_isa();
  return isa;
}

const KernelTable& kernels(Isa isa) {
  if (isa == Isa::avx2) {
    if (!isa_available(Isa::avx2)) throw std::runtime_error("AVX2 kernels are not available on this CPU");
    return *detail::avx2_table();
  }
  return detail::scalar_table();
}

const KernelTable& active_kernels() {
  static const KernelTable& table = kernels(active_isa());
  return table;
}

void poly_abs_diff(std::span<const double> coeffs_desc, double x, std::span<const double> z,
                   std::span<double> out) {
  check_sizes(z.size(), out.size());
  if (coeffs_desc.empty()) throw std::invalid_argument("poly_abs_diff: no coefficients");
  active_kernels().poly_abs_diff(coeffs_desc.data(), static_cast<int>(coeffs_desc.size()) - 1, x,
                                 z.data(), out.data(), z.size());
}

void logistic_derivatives(std::span<const double> y, std::span<const double> f,
                          std::span<double> d1, std::span<double> d2) {
  check_sizes(y.size(), f.size());
  check_sizes(y.size(), d1.size());
  check_sizes(y.size(), d2.size());
  active_kernels().logistic_derivatives(y.data(), f.data(), d1.data(), d2.data(), y.size());
}

void logistic_loss(std::span<const double> y, std::span<const double> f, std::span<double> out) {
  check_sizes(y.size(), f.size());
  check_sizes(y.size(), out.size());
  active_kernels().logistic_loss(y.data(), f.data(), out.data(), y.size());
}

void logistic_excess(std::span<const double> theta_star, std::span<const double> theta,
                     std::span<double> out) {
  check_sizes(theta_star.size(), theta.size());
  check_sizes(theta_star.size(), out.size());
  active_kernels().logistic_excess(theta_star.data(), theta.data(), out.data(), theta.size());
}

}  // namespace itreg::simd
