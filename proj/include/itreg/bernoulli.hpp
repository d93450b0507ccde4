#pragma once

#include <span>

namespace itreg {

/// Largest polynomial order with precomputed coefficients.
inline constexpr int kMaxBernoulliOrder = 64;

/// B_q(u) for even q in [2, kMaxBernoulliOrder] and u in [0, 1].
double bernoulli_poly(int q, double u);

/// Coefficients of B_q(u) / q! in ascending powers of u (length q + 1).
/// Exact rationals rounded once to double; the 1/q! scaling keeps every
/// coefficient small so Horner evaluation stays accurate for large q.
std::span<const double> scaled_bernoulli_coefficients(int q);

/// Bernoulli number B_k (B_1 = -1/2), k in [0, kMaxBernoulliOrder].
double bernoulli_number(int k);

}  // namespace itreg
