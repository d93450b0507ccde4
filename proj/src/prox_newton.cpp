#include "itreg/prox_newton.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "loss_batch.hpp"
#include "newton_loop.hpp"

namespace itreg {

Estimator Estimator::zero(std::shared_ptr<const KernelMatrix> kernel) {
  const auto n = kernel->size();
  return {std::move(kernel), Eigen::VectorXd::Zero(n)};
}

Eigen::VectorXd Estimator::training_predictions() const { return kernel->entries() * coefficients; }

double Estimator::rkhs_norm_squared() const {
  return coefficients.dot(kernel->entries() * coefficients);
}

namespace {

void check_problem(const KernelMatrix& kernel, const LossModel& loss, const Eigen::VectorXd& labels,
                   double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("proximal subproblem: lambda must be positive and finite");
  }
  if (labels.size() != kernel.size()) {
    throw std::invalid_argument("proximal subproblem: label count does not match kernel size");
  }
  for (Eigen::Index i = 0; i < labels.size(); ++i) check_label(loss, labels(i));
}

}  // namespace

ProxSubproblem::ProxSubproblem(LossModel loss, std::shared_ptr<const KernelMatrix> kernel,
                               Eigen::VectorXd labels, Eigen::VectorXd reference, double lambda)
    : loss_(loss),
      kernel_(std::move(kernel)),
      labels_(std::move(labels)),
      reference_(std::move(reference)),
      lambda_(lambda) {
  if (!kernel_) throw std::invalid_argument("proximal subproblem: null kernel");
  check_problem(*kernel_, loss_, labels_, lambda_);
  if (reference_.size() != kernel_->size()) {
    throw std::invalid_argument("proximal subproblem: reference has the wrong size");
  }
}

Eigen::VectorXd ProxSubproblem::predictions(const Eigen::VectorXd& beta) const {
  Eigen::VectorXd f = kernel_->entries() * beta;
  if (!f.allFinite()) throw SolverError("non-finite prediction; the iterate diverged");
  return f;
}

double ProxSubproblem::objective(const Eigen::VectorXd& beta) const {
  const Eigen::VectorXd f = kernel_->entries() * beta;
  if (!f.allFinite()) return std::numeric_limits<double>::infinity();
  const Eigen::VectorXd diff = beta - reference_;
  const double n = static_cast<double>(size());
  return detail::loss_sum(loss_, labels_, f) / n +
         0.5 * lambda_ * diff.dot(kernel_->entries() * diff);
}

Eigen::VectorXd ProxSubproblem::gradient_coeffs(const Eigen::VectorXd& beta) const {
  const Eigen::VectorXd f = predictions(beta);
  Eigen::VectorXd d1, d2;
  detail::loss_first_second(loss_, labels_, f, d1, d2);
  return d1 / static_cast<double>(size()) + lambda_ * (beta - reference_);
}

ProxSubproblem::Step ProxSubproblem::newton_step(const Eigen::VectorXd& beta) const {
  const Eigen::MatrixXd& K = kernel_->entries();
  const Eigen::VectorXd f = predictions(beta);
  Eigen::VectorXd d1, d2;
  detail::loss_first_second(loss_, labels_, f, d1, d2);
  const double n = static_cast<double>(size());

  Step step;
  step.gamma = d1 / n + lambda_ * (beta - reference_);
  Eigen::MatrixXd system = (d2 / n).asDiagonal() * K;
  system.diagonal().array() += lambda_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
  step.direction = -lu.solve(step.gamma);
  if (!step.direction.allFinite()) throw SolverError("Newton system solve failed");
  const double dec2 = -step.gamma.dot(K * step.direction);
  step.decrement = std::sqrt(std::max(dec2, 0.0));
  return step;
}

double ProxSubproblem::newton_decrement(const Eigen::VectorXd& beta) const {
  return newton_step(beta).decrement;
}

SubproblemState ProxSubproblem::solve(const NewtonOptions& options) const {
  auto outcome = detail::damped_newton(
      Eigen::VectorXd(reference_), [this](const Eigen::VectorXd& b) { return newton_step(b); },
      [this](const Eigen::VectorXd& b) { return objective(b); }, options);
  SubproblemState state;
  state.current = {kernel_, std::move(outcome.x)};
  state.reference = {kernel_, reference_};
  state.lambda = lambda_;
  state.decrement = outcome.decrement;
  state.iterations = outcome.iterations;
  state.objective_trace = std::move(outcome.objective_trace);
  return state;
}

// ---------------------------------------------------------------------------

EigenbasisProx::EigenbasisProx(LossModel loss, std::shared_ptr<const KernelMatrix> kernel,
                               Eigen::VectorXd labels, double lambda, double rank_tolerance)
    : loss_(loss), kernel_(std::move(kernel)), labels_(std::move(labels)), lambda_(lambda) {
  if (!kernel_) throw std::invalid_argument("eigenbasis prox: null kernel");
  check_problem(*kernel_, loss_, labels_, lambda_);
  if (!(rank_tolerance >= 0.0)) throw std::invalid_argument("eigenbasis prox: negative rank tolerance");

  const Eigen::VectorXd& s = kernel_->eigenvalues();
  const auto n = kernel_->size();
  const double numerical_zero = s(0) * static_cast<double>(n) * 1e-15;
  const double cutoff = std::max(numerical_zero, rank_tolerance * lambda_ * static_cast<double>(n));
  Eigen::Index m = 0;
  while (m < n && s(m) > cutoff) ++m;
  if (m == 0) m = 1;

  const Eigen::VectorXd kept = s.head(m);
  features_ = kernel_->eigenvectors().leftCols(m) * kept.cwiseSqrt().asDiagonal();
  inv_sqrt_eig_ = kept.cwiseSqrt().cwiseInverse();
}

Eigen::VectorXd EigenbasisProx::to_coefficients(const Eigen::VectorXd& w) const {
  return kernel_->eigenvectors().leftCols(rank()) * inv_sqrt_eig_.cwiseProduct(w);
}

Eigen::VectorXd EigenbasisProx::from_coefficients(const Eigen::VectorXd& beta) const {
  return features_.transpose() * beta;
}

double EigenbasisProx::objective(const Eigen::VectorXd& w, const Eigen::VectorXd& w_ref) const {
  const Eigen::VectorXd f = features_ * w;
  if (!f.allFinite()) return std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(labels_.size());
  return detail::loss_sum(loss_, labels_, f) / n + 0.5 * lambda_ * (w - w_ref).squaredNorm();
}

EigenbasisProx::Step EigenbasisProx::newton_step(const Eigen::VectorXd& w,
                                                 const Eigen::VectorXd& w_ref) const {
  const Eigen::VectorXd f = features_ * w;
  if (!f.allFinite()) throw SolverError("non-finite prediction; the iterate diverged");
  Eigen::VectorXd d1, d2;
  detail::loss_first_second(loss_, labels_, f, d1, d2);
  const double n = static_cast<double>(labels_.size());

  const Eigen::VectorXd grad = features_.transpose() * d1 / n + lambda_ * (w - w_ref);
  const Eigen::MatrixXd weighted = d2.cwiseSqrt().asDiagonal() * features_;
  Eigen::MatrixXd hessian = Eigen::MatrixXd::Identity(rank(), rank()) * lambda_;
  hessian.selfadjointView<Eigen::Lower>().rankUpdate(weighted.transpose(), 1.0 / n);
  Eigen::LLT<Eigen::MatrixXd> llt(hessian);
  if (llt.info() != Eigen::Success) throw SolverError("Cholesky factorization of the Hessian failed");

  Step step;
  step.direction = -llt.solve(grad);
  step.decrement = std::sqrt(std::max(-grad.dot(step.direction), 0.0));
  return step;
}

double EigenbasisProx::newton_decrement(const Eigen::VectorXd& w, const Eigen::VectorXd& w_ref) const {
  return newton_step(w, w_ref).decrement;
}

EigenbasisProx::Result EigenbasisProx::solve(const Eigen::VectorXd& w_ref,
                                             const NewtonOptions& options) const {
  if (w_ref.size() != rank()) throw std::invalid_argument("eigenbasis prox: reference has the wrong size");
  auto outcome = detail::damped_newton(
      Eigen::VectorXd(w_ref), [&](const Eigen::VectorXd& w) { return newton_step(w, w_ref); },
      [&](const Eigen::VectorXd& w) { return objective(w, w_ref); }, options);
  return {std::move(outcome.x), outcome.decrement, outcome.iterations};
}

}  // namespace itreg
