#pragma once

// Element-wise kernels with a scalar reference implementation and AVX2/FMA
// variants selected once per process from the CPU's capabilities. The
// override ITREG_SIMD={scalar,avx2} in the environment pins a variant.
//
// All variants agree to a few ulps, not bitwise: the vector paths use fused
// multiply-adds and their own exp/log.

#include <cstddef>
#include <span>
#include <string_view>

namespace itreg::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);
bool isa_available(Isa isa);
Isa active_isa();

struct KernelTable {
  // out[j] = p(|x - z[j]|), p given by `degree + 1` coefficients, highest
  // power first.
  void (*poly_abs_diff)(const double* coeffs_desc, int degree, double x, const double* z,
                        double* out, std::size_t n);
  // Logistic derivatives in the prediction for labels y in {-1, +1}:
  // d1 = -y sigmoid(-y f), d2 = sigmoid(y f) sigmoid(-y f).
  void (*logistic_derivatives)(const double* y, const double* f, double* d1, double* d2,
                               std::size_t n);
  // out[i] = log(1 + exp(-y f)).
  void (*logistic_loss)(const double* y, const double* f, double* out, std::size_t n);
  // Pointwise logistic excess risk of predicting `theta` when the Bernoulli
  // label model has logit `theta_star`.
  void (*logistic_excess)(const double* theta_star, const double* theta, double* out,
                          std::size_t n);
};

const KernelTable& kernels(Isa isa);
const KernelTable& active_kernels();

void poly_abs_diff(std::span<const double> coeffs_desc, double x, std::span<const double> z,
                   std::span<double> out);
void logistic_derivatives(std::span<const double> y, std::span<const double> f,
                          std::span<double> d1, std::span<double> d2);
void logistic_loss(std::span<const double> y, std::span<const double> f, std::span<double> out);
void logistic_excess(std::span<const double> theta_star, std::span<const double> theta,
                     std::span<double> out);

}  // namespace itreg::simd
