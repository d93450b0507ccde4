#include "itreg/risk.hpp"

#include <cmath>
#include <stdexcept>

#include "itreg/rng.hpp"
#include "itreg/simd.hpp"
#include "itreg/summation.hpp"

namespace itreg {

std::vector<double> predict(const Eigen::VectorXd& coefficients, const KernelSpec& spec,
                            std::span<const double> train_inputs, std::span<const double> x_new) {
  if (coefficients.size() != static_cast<Eigen::Index>(train_inputs.size())) {
    throw std::invalid_argument("predict: coefficient count does not match training inputs");
  }
  const Eigen::MatrixXd cross = cross_kernel(spec, train_inputs, x_new);
  const Eigen::VectorXd f = cross * coefficients;
  return {f.data(), f.data() + f.size()};
}

std::vector<double> predict(const Estimator& est, std::span<const double> x_new) {
  if (!est.kernel) throw std::invalid_argument("predict: estimator has no kernel");
  return predict(est.coefficients, est.kernel->spec(), est.kernel->inputs(), x_new);
}

std::vector<double> draw_mc_inputs(std::uint64_t task_seed, std::uint64_t mc_seed, int mc_samples) {
  if (mc_samples < 1) throw std::invalid_argument("mc_samples must be >= 1");
  auto rng = make_stream(task_seed, Stream::monte_carlo, mc_seed);
  std::vector<double> x(static_cast<std::size_t>(mc_samples));
  for (auto& v : x) v = rng.uniform();
  return x;
}

std::vector<double> logistic_excess_terms(std::span<const double> theta_star,
                                          std::span<const double> theta) {
  std::vector<double> out(theta.size());
  simd::logistic_excess(theta_star, theta, out);
  return out;
}

std::vector<double> squared_excess_terms(std::span<const double> theta_star,
                                         std::span<const double> theta) {
  if (theta_star.size() != theta.size()) throw std::invalid_argument("size mismatch");
  std::vector<double> out(theta.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double d = theta[i] - theta_star[i];
    out[i] = 0.5 * d * d;
  }
  return out;
}

RiskEstimate summarize(std::span<const double> terms) {
  if (terms.empty()) throw std::invalid_argument("summarize: no terms");
  const double m = static_cast<double>(terms.size());
  const double mean = pairwise_sum(terms) / m;
  std::vector<double> dev(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i) dev[i] = (terms[i] - mean) * (terms[i] - mean);
  const double var = terms.size() > 1 ? pairwise_sum(dev) / (m - 1.0) : 0.0;
  return {mean, static_cast<int>(terms.size()), std::sqrt(var / m)};
}

namespace {

std::vector<double> theta_star_at(const TaskSpec& task, std::span<const double> x) {
  const KernelSpec optimum{task.theta_star_order()};
  std::vector<double> out;
  out.reserve(x.size());
  for (double v : x) out.push_back(spline_kernel(optimum, 0.0, v));
  return out;
}

RiskEstimate excess_impl(LossKind kind, const Eigen::VectorXd& coefficients,
                         const KernelSpec& spec, std::span<const double> train_inputs,
                         const TaskSpec& task, int mc_samples, std::uint64_t mc_seed) {
  const auto x = draw_mc_inputs(task.seed, mc_seed, mc_samples);
  const auto theta = predict(coefficients, spec, train_inputs, x);
  const auto star = theta_star_at(task, x);
  return summarize(kind == LossKind::logistic ? logistic_excess_terms(star, theta)
                                              : squared_excess_terms(star, theta));
}

}  // namespace

RiskEstimate excess_risk_logistic(const Eigen::VectorXd& coefficients, const KernelSpec& spec,
                                  std::span<const double> train_inputs, const TaskSpec& task,
                                  int mc_samples, std::uint64_t mc_seed) {
  return excess_impl(LossKind::logistic, coefficients, spec, train_inputs, task, mc_samples,
                     mc_seed);
}

RiskEstimate excess_risk_squared(const Eigen::VectorXd& coefficients, const KernelSpec& spec,
                                 std::span<const double> train_inputs, const TaskSpec& task,
                                 int mc_samples, std::uint64_t mc_seed) {
  return excess_impl(LossKind::squared, coefficients, spec, train_inputs, task, mc_samples,
                     mc_seed);
}

RiskEstimate excess_risk(const Eigen::VectorXd& coefficients, const KernelSpec& spec,
                         std::span<const double> train_inputs, const TaskSpec& task,
                         int mc_samples, std::uint64_t mc_seed) {
  return excess_impl(task.loss_kind, coefficients, spec, train_inputs, task, mc_samples, mc_seed);
}

RiskEvaluator::RiskEvaluator(const KernelSpec& spec, std::span<const double> train_inputs,
                             std::uint64_t task_seed, int mc_samples, std::uint64_t mc_seed)
    : mc_inputs_(draw_mc_inputs(task_seed, mc_seed, mc_samples)),
      cross_(cross_kernel(spec, train_inputs, mc_inputs_)) {}

void RiskEvaluator::set_task(const TaskSpec& task) {
  theta_star_ = theta_star_at(task, mc_inputs_);
  loss_kind_ = task.loss_kind;
  has_task_ = true;
}

RiskEstimate RiskEvaluator::evaluate(const Eigen::VectorXd& coefficients) const {
  if (!has_task_) throw std::logic_error("RiskEvaluator: set_task was not called");
  if (coefficients.size() != cross_.cols()) {
    throw std::invalid_argument("RiskEvaluator: coefficient count does not match training inputs");
  }
  const Eigen::VectorXd f = cross_ * coefficients;
  const std::span<const double> theta(f.data(), static_cast<std::size_t>(f.size()));
  return summarize(loss_kind_ == LossKind::logistic ? logistic_excess_terms(theta_star_, theta)
                                                    : squared_excess_terms(theta_star_, theta));
}

}  // namespace itreg
