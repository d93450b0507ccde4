#include "itreg/spectral_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace itreg {

void validate(const FilterSpec& spec) {
  if (spec.steps_t < 1) throw std::invalid_argument("filter: steps_t must be >= 1");
  if (!(spec.lambda > 0.0)) throw std::invalid_argument("filter: lambda must be positive");
}

double filter_residual(const FilterSpec& spec, double sigma) {
  validate(spec);
  if (!(sigma >= 0.0)) throw std::invalid_argument("filter_residual: sigma must be >= 0");
  return std::pow(spec.lambda / (sigma + spec.lambda), spec.steps_t);
}

double filter_value(const FilterSpec& spec, double sigma) {
  validate(spec);
  if (!(sigma >= 0.0)) throw std::invalid_argument("filter_value: sigma must be >= 0");
  if (sigma == 0.0) return spec.steps_t / spec.lambda;
  // 1 - (lambda/(sigma+lambda))^t = -expm1(t log1p(-sigma/(sigma+lambda)))
  const double shrink = -std::expm1(spec.steps_t * std::log1p(-sigma / (sigma + spec.lambda)));
  return shrink / sigma;
}

Estimator filter_apply(const FilterSpec& spec, std::shared_ptr<const KernelMatrix> kernel,
                       const Eigen::VectorXd& labels) {
  validate(spec);
  if (labels.size() != kernel->size()) throw std::invalid_argument("filter_apply: label count mismatch");
  const double n = static_cast<double>(kernel->size());
  const Eigen::MatrixXd& U = kernel->eigenvectors();
  Eigen::VectorXd projected = U.transpose() * labels;
  for (Eigen::Index i = 0; i < projected.size(); ++i) {
    projected(i) *= filter_value(spec, kernel->eigenvalues()(i) / n);
  }
  Eigen::VectorXd beta = U * projected / n;
  return {std::move(kernel), std::move(beta)};
}

bool QualificationReport::ok() const {
  return std::none_of(rows.begin(), rows.end(), [](const QualificationRow& r) { return r.violated; });
}

QualificationReport qualification_check(int steps_t, double nu, std::span<const double> lambda_grid,
                                        std::span<const double> sigma_grid, double relative_slack) {
  if (steps_t < 1) throw std::invalid_argument("qualification_check: steps_t must be >= 1");
  if (!(nu > 0.0)) throw std::invalid_argument("qualification_check: nu must be positive");
  if (lambda_grid.empty() || sigma_grid.empty()) {
    throw std::invalid_argument("qualification_check: empty grid");
  }
  const double kappa = *std::max_element(sigma_grid.begin(), sigma_grid.end());
  QualificationReport report{steps_t, nu, relative_slack, {}};
  for (double lambda : lambda_grid) {
    QualificationRow row;
    row.lambda = lambda;
    for (double sigma : sigma_grid) {
      const double h = std::pow(lambda / (lambda + sigma), steps_t) * std::pow(sigma, nu);
      if (h > row.numeric_sup) {
        row.numeric_sup = h;
        row.argmax_sigma = sigma;
      }
    }
    row.analytic_bound = nu < steps_t
                             ? std::pow(nu * lambda / steps_t, nu)
                             : std::pow(lambda / (kappa + lambda), steps_t) * std::pow(kappa, nu);
    row.violated = row.numeric_sup > row.analytic_bound * (1.0 + relative_slack);
    report.rows.push_back(row);
  }
  return report;
}

DofCurve dof_curve(const KernelMatrix& kernel, std::span<const double> lambdas, std::size_t n) {
  if (n == 0) throw std::invalid_argument("dof_curve: n must be positive");
  DofCurve curve;
  const Eigen::VectorXd mu = kernel.eigenvalues() / static_cast<double>(n);
  for (double lambda : lambdas) {
    if (!(lambda > 0.0)) throw std::invalid_argument("dof_curve: lambda must be positive");
    curve.lambdas.push_back(lambda);
    curve.dof_values.push_back((mu.array() / (mu.array() + lambda)).sum());
  }
  return curve;
}

}  // namespace itreg
