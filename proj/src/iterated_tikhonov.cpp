#include "itreg/iterated_tikhonov.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "loss_batch.hpp"

namespace itreg {

bool default_enforce_prop2(LossKind kind) { return kind == LossKind::logistic; }

ProxRunConfig make_schedule(double lambda, int steps_t, double target_eps, GscRadius radius,
                            bool enforce_precondition) {
  if (!(lambda > 0.0)) throw std::invalid_argument("make_schedule: lambda must be positive");
  if (steps_t < 1) throw std::invalid_argument("make_schedule: at least one step is required");
  if (!(target_eps > 0.0)) throw std::invalid_argument("make_schedule: target_eps must be positive");
  if (enforce_precondition && radius.R > 0.0) {
    const double bound = std::sqrt(lambda) / (2.0 * radius.R);
    if (target_eps > bound) {
      std::ostringstream msg;
      msg << "make_schedule: target_eps " << target_eps << " exceeds sqrt(lambda)/(2R) = " << bound
          << " (lambda=" << lambda << ", R=" << radius.R << ")";
      throw std::invalid_argument(msg.str());
    }
  }
  ProxRunConfig config{lambda, steps_t, target_eps, {}};
  config.schedule.reserve(static_cast<std::size_t>(steps_t));
  for (int k = 1; k <= steps_t; ++k) {
    config.schedule.push_back(target_eps * std::pow(1.4, k - steps_t) / steps_t);
  }
  return config;
}

namespace {

SolverError annotate(const std::exception& e, int step) {
  return SolverError("proximal step " + std::to_string(step) + ": " + e.what());
}

void check_config(const ProxRunConfig& config) {
  if (config.schedule.size() != static_cast<std::size_t>(config.steps_t) || config.steps_t < 1) {
    throw std::invalid_argument("run_iterated_tikhonov: schedule length must equal steps_t >= 1");
  }
  if (!(config.lambda > 0.0)) throw std::invalid_argument("run_iterated_tikhonov: lambda must be positive");
}

}  // namespace

ProxTrajectory run_iterated_tikhonov(const LossModel& loss,
                                     std::shared_ptr<const KernelMatrix> kernel,
                                     const Eigen::VectorXd& labels, const ProxRunConfig& config,
                                     const TikhonovOptions& options) {
  check_config(config);
  ProxTrajectory trajectory;
  trajectory.iterates.push_back(Estimator::zero(kernel));

  if (options.backend == NewtonBackend::coefficient_lu) {
    for (int k = 1; k <= config.steps_t; ++k) {
      try {
        const ProxSubproblem sub(loss, kernel, labels, trajectory.iterates.back().coefficients,
                                 config.lambda);
        SubproblemState state =
            sub.solve({config.schedule[static_cast<std::size_t>(k - 1)], options.max_newton_iter});
        trajectory.iterates.push_back(std::move(state.current));
        trajectory.achieved_decrements.push_back(state.decrement);
        trajectory.newton_iterations.push_back(state.iterations);
      } catch (const SolverError& e) {
        throw annotate(e, k);
      }
    }
    return trajectory;
  }

  const EigenbasisProx prox(loss, kernel, labels, config.lambda, options.rank_tolerance);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(prox.rank());
  for (int k = 1; k <= config.steps_t; ++k) {
    try {
      auto result = prox.solve(w, {config.schedule[static_cast<std::size_t>(k - 1)],
                                   options.max_newton_iter});
      w = std::move(result.w);
      trajectory.iterates.push_back({kernel, prox.to_coefficients(w)});
      trajectory.achieved_decrements.push_back(result.decrement);
      trajectory.newton_iterations.push_back(result.iterations);
    } catch (const SolverError& e) {
      throw annotate(e, k);
    }
  }
  return trajectory;
}

double true_decrement_audit(const ProxTrajectory& trajectory, const LossModel& loss,
                            std::shared_ptr<const KernelMatrix> kernel,
                            const Eigen::VectorXd& labels, double lambda, double audit_tol) {
  if (trajectory.iterates.size() < 2) {
    throw std::invalid_argument("true_decrement_audit: trajectory has no proximal steps");
  }
  const int t = static_cast<int>(trajectory.iterates.size()) - 1;
  Eigen::VectorXd exact = Eigen::VectorXd::Zero(kernel->size());
  for (int k = 1; k < t; ++k) {
    try {
      const ProxSubproblem sub(loss, kernel, labels, exact, lambda);
      exact = sub.solve({audit_tol, 200}).current.coefficients;
    } catch (const SolverError& e) {
      throw SolverError("audit chain, " + std::string(annotate(e, k).what()));
    }
  }
  const ProxSubproblem last(loss, kernel, labels, exact, lambda);
  return last.newton_decrement(trajectory.iterates.back().coefficients);
}

double empirical_gradient_norm(const LossModel& loss, const Estimator& estimator,
                               const Eigen::VectorXd& labels) {
  const Eigen::VectorXd f = estimator.training_predictions();
  Eigen::VectorXd d1, d2;
  detail::loss_first_second(loss, labels, f, d1, d2);
  const double n = static_cast<double>(labels.size());
  return std::sqrt(std::max(d1.dot(estimator.kernel->entries() * d1), 0.0)) / n;
}

double empirical_risk(const LossModel& loss, const Estimator& estimator,
                      const Eigen::VectorXd& labels) {
  return detail::loss_sum(loss, labels, estimator.training_predictions()) /
         static_cast<double>(labels.size());
}

}  // namespace itreg
