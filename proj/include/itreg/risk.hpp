#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "itreg/kernels.hpp"
#include "itreg/prox_newton.hpp"
#include "itreg/synthetic.hpp"

namespace itreg {

inline constexpr int kDefaultMcSamples = 10000;

struct RiskEstimate {
  double value = 0.0;
  int mc_samples = 0;
  double std_error = 0.0;  ///< sample std / sqrt(mc_samples)
};

/// f(x) = sum_i beta_i Lambda_q(x_i, x) at every x in x_new.
std::vector<double> predict(const Eigen::VectorXd& coefficients, const KernelSpec& spec,
                            std::span<const double> train_inputs, std::span<const double> x_new);
std::vector<double> predict(const Estimator& est, std::span<const double> x_new);

/// Fresh uniform inputs from the Monte Carlo substream of (task seed, mc_seed).
std::vector<double> draw_mc_inputs(std::uint64_t task_seed, std::uint64_t mc_seed, int mc_samples);

/// Pointwise excess risks and their mean / standard error.
std::vector<double> logistic_excess_terms(std::span<const double> theta_star,
                                          std::span<const double> theta);
std::vector<double> squared_excess_terms(std::span<const double> theta_star,
                                         std::span<const double> theta);
RiskEstimate summarize(std::span<const double> terms);

RiskEstimate excess_risk_logistic(const Eigen::VectorXd& coefficients, const KernelSpec& spec,
                                  std::span<const double> train_inputs, const TaskSpec& task,
                                  int mc_samples = kDefaultMcSamples, std::uint64_t mc_seed = 0);
RiskEstimate excess_risk_squared(const Eigen::VectorXd& coefficients, const KernelSpec& spec,
                                 std::span<const double> train_inputs, const TaskSpec& task,
                                 int mc_samples = kDefaultMcSamples, std::uint64_t mc_seed = 0);
RiskEstimate excess_risk(const Eigen::VectorXd& coefficients, const KernelSpec& spec,
                         std::span<const double> train_inputs, const TaskSpec& task,
                         int mc_samples = kDefaultMcSamples, std::uint64_t mc_seed = 0);

/// Caches the Monte Carlo inputs and their cross kernel against one set of
/// training inputs, so many estimators on the same inputs (different lambda,
/// t or planted r) cost one matrix-vector product each.
class RiskEvaluator {
 public:
  RiskEvaluator(const KernelSpec& spec, std::span<const double> train_inputs,
                std::uint64_t task_seed, int mc_samples = kDefaultMcSamples,
                std::uint64_t mc_seed = 0);

  /// Switches the planted optimum (loss and r); the inputs are unchanged.
  void set_task(const TaskSpec& task);

  RiskEstimate evaluate(const Eigen::VectorXd& coefficients) const;

  std::span<const double> mc_inputs() const { return mc_inputs_; }
  const Eigen::MatrixXd& cross() const { return cross_; }

 private:
  std::vector<double> mc_inputs_;
  Eigen::MatrixXd cross_;  // mc_samples x n
  std::vector<double> theta_star_;
  LossKind loss_kind_ = LossKind::logistic;
  bool has_task_ = false;
};

}  // namespace itreg
