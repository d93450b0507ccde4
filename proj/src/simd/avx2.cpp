// AVX2 + FMA variants. Every function carries a target attribute instead of
// the translation unit being built with -mavx2, so nothing in here leaks
// AVX2 code into inline functions shared with the rest of the library.

#include "variants.hpp"

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#define ITREG_HAVE_AVX2 1
#include <immintrin.h>

#include <cmath>
#endif

namespace itreg::simd::detail {

#ifdef ITREG_HAVE_AVX2

#define ITREG_AVX2 __attribute__((target("avx2,fma")))

namespace {

ITREG_AVX2 inline __m256d abs_pd(__m256d v) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

// exp(x) after clamping to [-708, 709]; Cephes rational approximation on
// |r| <= ln(2)/2, then scaling by 2^n through the exponent field.
ITREG_AVX2 inline __m256d exp_pd(__m256d x) {
  x = _mm256_min_pd(_mm256_max_pd(x, _mm256_set1_pd(-708.0)), _mm256_set1_pd(709.0));
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634073599)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(6.93145751953125E-1), x);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.42860682030941723212E-6), r);

  const __m256d rr = _mm256_mul_pd(r, r);
  __m256d p = _mm256_set1_pd(1.26177193074810590878E-4);
  p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(3.02994407707441961300E-2));
  p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(9.99999999999999999910E-1));
  p = _mm256_mul_pd(p, r);
  __m256d q = _mm256_set1_pd(3.00198505138664455042E-6);
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.52448340349684104192E-3));
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.27265548208155028766E-1));
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.00000000000000000009E0));
  __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  e = _mm256_fmadd_pd(e, _mm256_set1_pd(2.0), _mm256_set1_pd(1.0));

  const __m128i n32 = _mm256_cvtpd_epi32(n);
  __m256i bits = _mm256_cvtepi32_epi64(n32);
  bits = _mm256_slli_epi64(_mm256_add_epi64(bits, _mm256_set1_epi64x(1023)), 52);
  return _mm256_mul_pd(e, _mm256_castsi256_pd(bits));
}

// Natural log for finite x > 0 (normal range), Cephes log.c structure.
ITREG_AVX2 inline __m256d log_pd(__m256d x) {
  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i exp_field = _mm256_and_si256(_mm256_srli_epi64(bits, 52), _mm256_set1_epi64x(0x7ff));
  const __m256i lo32 = _mm256_permutevar8x32_epi32(exp_field, _mm256_setr_epi32(0, 2, 4, 6, 0, 0, 0, 0));
  __m256d e = _mm256_sub_pd(_mm256_cvtepi32_pd(_mm256_castsi256_si128(lo32)), _mm256_set1_pd(1022.0));
  // mantissa in [0.5, 1)
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(
      _mm256_and_si256(bits, _mm256_set1_epi64x(0x800fffffffffffffLL)),
      _mm256_set1_epi64x(0x3fe0000000000000LL)));

  const __m256d below = _mm256_cmp_pd(m, _mm256_set1_pd(0.70710678118654752440), _CMP_LT_OQ);
  e = _mm256_sub_pd(e, _mm256_and_pd(below, _mm256_set1_pd(1.0)));
  m = _mm256_sub_pd(_mm256_add_pd(m, _mm256_and_pd(below, m)), _mm256_set1_pd(1.0));

  const __m256d z = _mm256_mul_pd(m, m);
  __m256d p = _mm256_set1_pd(1.01875663804580931796E-4);
  p = _mm256_fmadd_pd(p, m, _mm256_set1_pd(4.97494994976747001425E-1));
  p = _mm256_fmadd_pd(p, m, _mm256_set1_pd(4.70579119878881725854E0));
  p = _mm256_fmadd_pd(p, m, _mm256_set1_pd(1.44989225341610930846E1));
  p = _mm256_fmadd_pd(p, m, _mm256_set1_pd(1.79368678507819816313E1));
  p = _mm256_fmadd_pd(p, m, _mm256_set1_pd(7.70838733755885391666E0));
  __m256d q = _mm256_add_pd(m, _mm256_set1_pd(1.12873587189167450590E1));
  q = _mm256_fmadd_pd(q, m, _mm256_set1_pd(4.52279145837532221105E1));
  q = _mm256_fmadd_pd(q, m, _mm256_set1_pd(8.29875266912776603211E1));
  q = _mm256_fmadd_pd(q, m, _mm256_set1_pd(7.11544750618563894466E1));
  q = _mm256_fmadd_pd(q, m, _mm256_set1_pd(2.31251620126765340583E1));

  __m256d y = _mm256_mul_pd(m, _mm256_div_pd(_mm256_mul_pd(z, p), q));
  y = _mm256_fnmadd_pd(e, _mm256_set1_pd(2.121944400546905827679E-4), y);
  y = _mm256_fnmadd_pd(z, _mm256_set1_pd(0.5), y);
  const __m256d r = _mm256_add_pd(m, y);
  return _mm256_fmadd_pd(e, _mm256_set1_pd(0.693359375), r);
}

// log1p(u) for u in [0, 1]: log(w) corrected by the rounding of w = 1 + u.
ITREG_AVX2 inline __m256d log1p_unit_pd(__m256d u) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d w = _mm256_add_pd(one, u);
  const __m256d err = _mm256_sub_pd(u, _mm256_sub_pd(w, one));
  return _mm256_add_pd(log_pd(w), _mm256_div_pd(err, w));
}

ITREG_AVX2 void poly_abs_diff(const double* c, int degree, double x, const double* z,
                              double* out, std::size_t n) {
  const __m256d xv = _mm256_set1_pd(x);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d d = abs_pd(_mm256_sub_pd(xv, _mm256_loadu_pd(z + j)));
    __m256d acc = _mm256_set1_pd(c[0]);
    for (int k = 1; k <= degree; ++k) acc = _mm256_fmadd_pd(acc, d, _mm256_set1_pd(c[k]));
    _mm256_storeu_pd(out + j, acc);
  }
  for (; j < n; ++j) {
    const double d = std::abs(x - z[j]);
    double acc = c[0];
    for (int k = 1; k <= degree; ++k) acc = std::fma(acc, d, c[k]);
    out[j] = acc;
  }
}

// sigmoid(|m|) and sigmoid(-|m|) from a single exp.
struct SigmoidPair {
  __m256d big;
  __m256d small;
  __m256d e;
};

ITREG_AVX2 inline SigmoidPair sigmoid_pair(__m256d m) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d e = exp_pd(_mm256_sub_pd(_mm256_setzero_pd(), abs_pd(m)));
  const __m256d denom = _mm256_add_pd(one, e);
  return {_mm256_div_pd(one, denom), _mm256_div_pd(e, denom), e};
}

// Scalar tails reuse the vector code on a zero-padded block so each element
// gets the same arithmetic regardless of its position.
template <typename Body>
ITREG_AVX2 inline void for_blocks(std::size_t n, Body body) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) body(i, 4);
  if (i < n) body(i, n - i);
}

ITREG_AVX2 inline __m256d load_partial(const double* p, std::size_t count) {
  if (count == 4) return _mm256_loadu_pd(p);
  alignas(32) double buf[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < count; ++k) buf[k] = p[k];
  return _mm256_load_pd(buf);
}

ITREG_AVX2 inline void store_partial(double* p, __m256d v, std::size_t count) {
  if (count == 4) {
    _mm256_storeu_pd(p, v);
    return;
  }
  alignas(32) double buf[4];
  _mm256_store_pd(buf, v);
  for (std::size_t k = 0; k < count; ++k) p[k] = buf[k];
}

ITREG_AVX2 void logistic_derivatives(const double* y, const double* f, double* d1, double* d2,
                                     std::size_t n) {
  for_blocks(n, [&](std::size_t i, std::size_t count) ITREG_AVX2 {
    const __m256d yv = load_partial(y + i, count);
    const __m256d m = _mm256_mul_pd(yv, load_partial(f + i, count));
    const SigmoidPair s = sigmoid_pair(m);
    const __m256d nonneg = _mm256_cmp_pd(m, _mm256_setzero_pd(), _CMP_GE_OQ);
    const __m256d s_neg = _mm256_blendv_pd(s.big, s.small, nonneg);
    store_partial(d1 + i, _mm256_sub_pd(_mm256_setzero_pd(), _mm256_mul_pd(yv, s_neg)), count);
    store_partial(d2 + i, _mm256_mul_pd(s.big, s.small), count);
  });
}

ITREG_AVX2 void logistic_loss(const double* y, const double* f, double* out, std::size_t n) {
  for_blocks(n, [&](std::size_t i, std::size_t count) ITREG_AVX2 {
    const __m256d u = _mm256_sub_pd(_mm256_setzero_pd(),
                                    _mm256_mul_pd(load_partial(y + i, count), load_partial(f + i, count)));
    const __m256d e = exp_pd(_mm256_sub_pd(_mm256_setzero_pd(), abs_pd(u)));
    const __m256d v = _mm256_add_pd(_mm256_max_pd(u, _mm256_setzero_pd()), log1p_unit_pd(e));
    store_partial(out + i, v, count);
  });
}

ITREG_AVX2 void logistic_excess(const double* ts, const double* th, double* out, std::size_t n) {
  for_blocks(n, [&](std::size_t i, std::size_t count) ITREG_AVX2 {
    const __m256d zero = _mm256_setzero_pd();
    const __m256d tsv = load_partial(ts + i, count);
    const __m256d thv = load_partial(th + i, count);
    const SigmoidPair ps = sigmoid_pair(tsv);
    const __m256d nonneg = _mm256_cmp_pd(tsv, zero, _CMP_GE_OQ);
    const __m256d p_pos = _mm256_blendv_pd(ps.small, ps.big, nonneg);
    const __m256d p_neg = _mm256_blendv_pd(ps.big, ps.small, nonneg);
    const __m256d ls = log1p_unit_pd(ps.e);
    const __m256d lt = log1p_unit_pd(exp_pd(_mm256_sub_pd(zero, abs_pd(thv))));
    const __m256d neg_th = _mm256_sub_pd(zero, thv);
    const __m256d neg_ts = _mm256_sub_pd(zero, tsv);
    const __m256d pos_term = _mm256_sub_pd(_mm256_add_pd(_mm256_max_pd(neg_th, zero), lt),
                                           _mm256_add_pd(_mm256_max_pd(neg_ts, zero), ls));
    const __m256d neg_term = _mm256_sub_pd(_mm256_add_pd(_mm256_max_pd(thv, zero), lt),
                                           _mm256_add_pd(_mm256_max_pd(tsv, zero), ls));
    store_partial(out + i, _mm256_add_pd(_mm256_mul_pd(p_pos, pos_term), _mm256_mul_pd(p_neg, neg_term)),
                  count);
  });
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{poly_abs_diff, logistic_derivatives, logistic_loss,
                                 logistic_excess};
  return &table;
}

#else

const KernelTable* avx2_table() { return nullptr; }

#endif

}  // namespace itreg::simd::detail
