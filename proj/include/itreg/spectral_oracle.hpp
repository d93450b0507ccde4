#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "itreg/kernels.hpp"
#include "itreg/prox_newton.hpp"

namespace itreg {

/// Iterated Tikhonov spectral filter
///   g(sigma) = (1 - (lambda / (sigma + lambda))^t) / sigma,  g(0) = t / lambda.
struct FilterSpec {
  int steps_t = 1;
  double lambda = 1.0;
};

void validate(const FilterSpec& spec);

double filter_value(const FilterSpec& spec, double sigma);
/// 1 - sigma g(sigma) = (lambda / (sigma + lambda))^t
double filter_residual(const FilterSpec& spec, double sigma);

/// Squared-loss estimator beta = (1/n) U g(s / n) U^T y.
Estimator filter_apply(const FilterSpec& spec, std::shared_ptr<const KernelMatrix> kernel,
                       const Eigen::VectorXd& labels);

struct QualificationRow {
  double lambda = 0.0;
  double numeric_sup = 0.0;
  double argmax_sigma = 0.0;
  double analytic_bound = 0.0;
  bool violated = false;
};

struct QualificationReport {
  int steps_t = 0;
  double nu = 0.0;
  double relative_slack = 0.0;
  std::vector<QualificationRow> rows;

  bool ok() const;
};

/// For each lambda, the sup over `sigma_grid` of (lambda/(sigma+lambda))^t sigma^nu
/// against the bound (nu lambda / t)^nu when nu < t and
/// (lambda/(kappa+lambda))^t kappa^nu otherwise, kappa = max of the grid.
/// A row is violated when the sup exceeds bound * (1 + relative_slack).
QualificationReport qualification_check(int steps_t, double nu, std::span<const double> lambda_grid,
                                        std::span<const double> sigma_grid,
                                        double relative_slack = 1e-12);

struct DofCurve {
  std::vector<double> lambdas;
  std::vector<double> dof_values;
};

/// sum_i mu_i / (mu_i + lambda) over the eigenvalues mu_i of K / n.
DofCurve dof_curve(const KernelMatrix& kernel, std::span<const double> lambdas, std::size_t n);

}  // namespace itreg
