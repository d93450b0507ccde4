#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace itreg {

/// Periodic spline kernel of even order q on [0, 1]:
///   Lambda_q(x, z) = 1 + (-1)^(q/2 - 1) / q! * B_q(|x - z|).
struct KernelSpec {
  int order_q = 2;
};

void validate(const KernelSpec& spec);

/// Polynomial of Lambda_q in d = |x - z|, highest power first, for use with
/// simd::poly_abs_diff. The leading 1 is folded into the constant term.
std::span<const double> spline_coefficients(int q);

double spline_kernel(const KernelSpec& spec, double x, double z);

/// Kernel values between every x_new (rows) and every train input (columns).
Eigen::MatrixXd cross_kernel(const KernelSpec& spec, std::span<const double> train_inputs,
                             std::span<const double> x_new);

/// Symmetric Gram matrix K_ij = Lambda_q(x_i, x_j) together with its
/// eigendecomposition K = U diag(s) U^T. Eigenvalues are sorted
/// nonincreasing and clamped at zero. Immutable after construction.
class KernelMatrix {
 public:
  KernelMatrix(KernelSpec spec, std::vector<double> inputs);

  const KernelSpec& spec() const { return spec_; }
  std::span<const double> inputs() const { return inputs_; }
  Eigen::Index size() const { return entries_.rows(); }

  const Eigen::MatrixXd& entries() const { return entries_; }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }
  /// Smallest eigenvalue before clamping.
  double raw_min_eigenvalue() const { return raw_min_eigenvalue_; }
  std::vector<double> diagonal() const;

 private:
  KernelSpec spec_;
  std::vector<double> inputs_;
  Eigen::MatrixXd entries_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  double raw_min_eigenvalue_ = 0.0;
};

KernelMatrix gram_matrix(const KernelSpec& spec, std::span<const double> inputs);

/// Order of the planted optimum Lambda_{q*}(0, .), q* = (r + 1/2) alpha + 1/2.
/// Throws std::invalid_argument when q* is not an even integer in range,
/// listing the admissible r for the given alpha.
int theta_star_order(double r, double alpha);

double theta_star_eval(double r, double alpha, double x);

}  // namespace itreg
