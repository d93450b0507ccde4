// Reference implementations. Built with -ffp-contract=off so that every
// multiply and add rounds separately.

#include <algorithm>
#include <cmath>

#include "variants.hpp"

namespace itreg::simd::detail {
namespace {

void poly_abs_diff(const double* c, int degree, double x, const double* z, double* out,
                   std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    const double d = std::abs(x - z[j]);
    double acc = c[0];
    for (int k = 1; k <= degree; ++k) acc = acc * d + c[k];
    out[j] = acc;
  }
}

void logistic_derivatives(const double* y, const double* f, double* d1, double* d2,
                          std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double m = y[i] * f[i];
    const double e = std::exp(-std::abs(m));
    const double big = 1.0 / (1.0 + e);   // sigmoid(|m|)
    const double small = e / (1.0 + e);   // sigmoid(-|m|)
    const double s_neg = m >= 0.0 ? small : big;  // sigmoid(-m)
    d1[i] = -y[i] * s_neg;
    d2[i] = big * small;
  }
}

void logistic_loss(const double* y, const double* f, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double u = -y[i] * f[i];
    out[i] = std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u)));
  }
}

void logistic_excess(const double* ts, const double* th, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double es = std::exp(-std::abs(ts[i]));
    const double p_big = 1.0 / (1.0 + es);
    const double p_small = es / (1.0 + es);
    const double p_pos = ts[i] >= 0.0 ? p_big : p_small;  // P(y = +1)
    const double p_neg = ts[i] >= 0.0 ? p_small : p_big;
    const double ls = std::log1p(es);
    const double lt = std::log1p(std::exp(-std::abs(th[i])));
    // softplus(u) = max(u, 0) + log1p(exp(-|u|))
    const double pos_term = (std::max(-th[i], 0.0) + lt) - (std::max(-ts[i], 0.0) + ls);
    const double neg_term = (std::max(th[i], 0.0) + lt) - (std::max(ts[i], 0.0) + ls);
    out[i] = p_pos * pos_term + p_neg * neg_term;
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{poly_abs_diff, logistic_derivatives, logistic_loss,
                                 logistic_excess};
  return table;
}

}  // namespace itreg::simd::detail
