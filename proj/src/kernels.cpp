#include "itreg/kernels.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "itreg/bernoulli.hpp"
#include "itreg/simd.hpp"

namespace itreg {
namespace {

struct SplineTables {
  std::array<std::vector<double>, kMaxBernoulliOrder + 1> desc;

  SplineTables() {
    for (int q = 2; q <= kMaxBernoulliOrder; q += 2) {
      const auto scaled = scaled_bernoulli_coefficients(q);
      const double sign = (q / 2 - 1) % 2 == 0 ? 1.0 : -1.0;
      auto& c = desc[q];
      c.resize(q + 1);
      for (int k = 0; k <= q; ++k) c[q - k] = sign * scaled[k];
      c[q] += 1.0;
    }
  }
};

const SplineTables& spline_tables() {
  static const SplineTables instance;
  return instance;
}

void check_unit_interval(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::invalid_argument(std::string(what) + ": input " + std::to_string(x) +
                                " lies outside [0, 1]");
  }
}

}  // namespace

void validate(const KernelSpec& spec) {
  if (spec.order_q < 2 || spec.order_q % 2 != 0 || spec.order_q > kMaxBernoulliOrder) {
    throw std::invalid_argument("spline kernel order must be even and in [2, " +
                                std::to_string(kMaxBernoulliOrder) + "], got " +
                                std::to_string(spec.order_q));
  }
}

std::span<const double> spline_coefficients(int q) {
  validate(KernelSpec{q});
  return spline_tables().desc[q];
}

double spline_kernel(const KernelSpec& spec, double x, double z) {
  validate(spec);
  check_unit_interval(x, "spline_kernel");
  check_unit_interval(z, "spline_kernel");
  const auto c = spline_coefficients(spec.order_q);
  const double d = std::abs(x - z);
  double acc = c[0];
  for (std::size_t k = 1; k < c.size(); ++k) acc = acc * d + c[k];
  return acc;
}

Eigen::MatrixXd cross_kernel(const KernelSpec& spec, std::span<const double> train_inputs,
                             std::span<const double> x_new) {
  validate(spec);
  for (double x : train_inputs) check_unit_interval(x, "cross_kernel");
  for (double x : x_new) check_unit_interval(x, "cross_kernel");
  const auto c = spline_coefficients(spec.order_q);
  // Column-major: fill row j of the transpose, i.e. one column per new point.
  Eigen::MatrixXd out_t(static_cast<Eigen::Index>(train_inputs.size()),
                        static_cast<Eigen::Index>(x_new.size()));
  for (std::size_t j = 0; j < x_new.size(); ++j) {
    simd::poly_abs_diff(c, x_new[j], train_inputs,
                        std::span<double>(out_t.col(static_cast<Eigen::Index>(j)).data(),
                                          train_inputs.size()));
  }
  return out_t.transpose();
}

KernelMatrix::KernelMatrix(KernelSpec spec, std::vector<double> inputs)
    : spec_(spec), inputs_(std::move(inputs)) {
  validate(spec_);
  if (inputs_.empty()) throw std::invalid_argument("gram_matrix: no inputs");
  for (double x : inputs_) check_unit_interval(x, "gram_matrix");

  const auto n = static_cast<Eigen::Index>(inputs_.size());
  const auto c = spline_coefficients(spec_.order_q);
  entries_.resize(n, n);
  // |x_i - x_j| is exactly symmetric in floating point, so filling full
  // columns yields a bitwise symmetric matrix.
  for (Eigen::Index j = 0; j < n; ++j) {
    simd::poly_abs_diff(c, inputs_[static_cast<std::size_t>(j)], inputs_,
                        std::span<double>(entries_.col(j).data(), inputs_.size()));
  }
  if (!entries_.allFinite()) throw std::runtime_error("gram_matrix: non-finite kernel entries");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(entries_, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("gram_matrix: eigendecomposition failed");
  }
  // Eigen sorts ascending; store nonincreasing.
  eigenvalues_ = solver.eigenvalues().reverse();
  eigenvectors_ = solver.eigenvectors().rowwise().reverse();
  raw_min_eigenvalue_ = eigenvalues_(n - 1);
  const double top = eigenvalues_(0);
  if (raw_min_eigenvalue_ < -1e-8 * std::max(top, 0.0)) {
    std::ostringstream msg;
    msg << "gram_matrix: kernel matrix is not positive semidefinite (min eigenvalue "
        << raw_min_eigenvalue_ << ", max " << top << ")";
    throw std::runtime_error(msg.str());
  }
  eigenvalues_ = eigenvalues_.cwiseMax(0.0);
}

std::vector<double> KernelMatrix::diagonal() const {
  std::vector<double> d(static_cast<std::size_t>(size()));
  for (Eigen::Index i = 0; i < size(); ++i) d[static_cast<std::size_t>(i)] = entries_(i, i);
  return d;
}

KernelMatrix gram_matrix(const KernelSpec& spec, std::span<const double> inputs) {
  return KernelMatrix(spec, std::vector<double>(inputs.begin(), inputs.end()));
}

int theta_star_order(double r, double alpha) {
  const double q = (r + 0.5) * alpha + 0.5;
  const double rounded = std::round(q);
  const bool even_integer = std::abs(q - rounded) <= 1e-9 && static_cast<long>(rounded) % 2 == 0;
  if (!(r > 0.0) || !(alpha > 0.0) || !even_integer || rounded < 2 ||
      rounded > kMaxBernoulliOrder) {
    std::ostringstream msg;
    msg << "(r=" << r << ", alpha=" << alpha << ") gives theta* order " << q
        << ", which is not an even integer in [2, " << kMaxBernoulliOrder << "]";
    if (alpha > 0.0) {
      msg << "; valid r for alpha=" << alpha << ":";
      int listed = 0;
      for (int even = 2; even <= kMaxBernoulliOrder && listed < 8; even += 2) {
        const double valid_r = (even - 0.5) / alpha - 0.5;
        if (valid_r > 0.0) {
          msg << ' ' << valid_r;
          ++listed;
        }
      }
      msg << " ...";
    }
    throw std::invalid_argument(msg.str());
  }
  return static_cast<int>(rounded);
}

double theta_star_eval(double r, double alpha, double x) {
  return spline_kernel(KernelSpec{theta_star_order(r, alpha)}, 0.0, x);
}

}  // namespace itreg
