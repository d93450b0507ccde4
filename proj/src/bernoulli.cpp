#include "itreg/bernoulli.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

namespace itreg {
namespace {

namespace mp = boost::multiprecision;
using Rational = mp::cpp_rational;

double to_double(const Rational& value) {
  using Wide = mp::cpp_bin_float_100;
  const Wide num(mp::numerator(value));
  const Wide den(mp::denominator(value));
  return static_cast<double>(num / den);
}

struct BernoulliTables {
  std::array<double, kMaxBernoulliOrder + 1> numbers{};
  // scaled[q] holds B_k / (k! (q-k)!) as the coefficient of u^(q-k).
  std::array<std::vector<double>, kMaxBernoulliOrder + 1> scaled;

  BernoulliTables() {
    constexpr int kMax = kMaxBernoulliOrder;
    std::vector<Rational> b(kMax + 1);
    std::vector<Rational> factorial(kMax + 1);
    factorial[0] = 1;
    for (int k = 1; k <= kMax; ++k) factorial[k] = factorial[k - 1] * k;

    // sum_{k=0}^{m} C(m+1, k) B_k = 0
    b[0] = 1;
    for (int m = 1; m <= kMax; ++m) {
      Rational acc = 0;
      mp::cpp_int binom = 1;  // C(m+1, 0)
      for (int k = 0; k < m; ++k) {
        acc += Rational(binom) * b[k];
        binom = binom * (m + 1 - k) / (k + 1);
      }
      b[m] = -acc / Rational(m + 1);
    }
    for (int k = 0; k <= kMax; ++k) numbers[k] = to_double(b[k]);

    for (int q = 0; q <= kMax; ++q) {
      scaled[q].assign(q + 1, 0.0);
      for (int k = 0; k <= q; ++k) {
        scaled[q][q - k] = to_double(b[k] / (factorial[k] * factorial[q - k]));
      }
    }
  }
};

const BernoulliTables& tables() {
  static const BernoulliTables instance;
  return instance;
}

void check_order(int q) {
  if (q <= 0 || q % 2 != 0 || q > kMaxBernoulliOrder) {
    throw std::invalid_argument("Bernoulli polynomial order must be even and in [2, " +
                                std::to_string(kMaxBernoulliOrder) + "], got " +
                                std::to_string(q));
  }
}

}  // namespace

std::span<const double> scaled_bernoulli_coefficients(int q) {
  check_order(q);
  return tables().scaled[q];
}

double bernoulli_number(int k) {
  if (k < 0 || k > kMaxBernoulliOrder) throw std::out_of_range("bernoulli_number: index out of range");
  return tables().numbers[k];
}

double bernoulli_poly(int q, double u) {
  check_order(q);
  if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("bernoulli_poly: u must lie in [0, 1]");
  const auto& c = tables().scaled[q];
  double acc = c[q];
  for (int k = q - 1; k >= 0; --k) acc = acc * u + c[k];
  return acc * std::tgamma(q + 1.0);
}

}  // namespace itreg
