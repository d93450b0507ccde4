#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "itreg/kernels.hpp"
#include "itreg/losses.hpp"
#include "itreg/prox_newton.hpp"

namespace itreg {

/// Outer proximal-point run: lambda, number of steps and the per-step
/// tolerances eps_k = target_eps * 1.4^(k - t) / t, k = 1..t.
struct ProxRunConfig {
  double lambda = 0.0;
  int steps_t = 1;
  double target_eps = 0.0;
  std::vector<double> schedule;
};

/// Error-propagation rule is only meaningful for a loss with R > 0.
bool default_enforce_prop2(LossKind kind);

/// Builds the tolerance schedule. With `enforce_precondition`, throws
/// std::invalid_argument when target_eps > sqrt(lambda) / (2 R).
ProxRunConfig make_schedule(double lambda, int steps_t, double target_eps, GscRadius radius,
                            bool enforce_precondition);

enum class NewtonBackend {
  coefficient_lu,  ///< ProxSubproblem (reference implementation)
  eigenbasis,      ///< EigenbasisProx
};

struct TikhonovOptions {
  NewtonBackend backend = NewtonBackend::coefficient_lu;
  double rank_tolerance = 0.0;  ///< eigenbasis backend only
  int max_newton_iter = 100;
};

/// iterates[0] is the zero estimator; iterates[k] approximates the prox of
/// iterates[k-1] with Newton decrement achieved_decrements[k-1] <= schedule[k-1].
struct ProxTrajectory {
  std::vector<Estimator> iterates;
  std::vector<double> achieved_decrements;
  std::vector<int> newton_iterations;
};

ProxTrajectory run_iterated_tikhonov(const LossModel& loss,
                                     std::shared_ptr<const KernelMatrix> kernel,
                                     const Eigen::VectorXd& labels, const ProxRunConfig& config,
                                     const TikhonovOptions& options = {});

/// Recomputes the exact chain up to step t-1 at `audit_tol` and returns the
/// Newton decrement of the trajectory's last iterate for the exact last
/// subproblem. For t = 1 the chain is empty and the reference is zero.
double true_decrement_audit(const ProxTrajectory& trajectory, const LossModel& loss,
                            std::shared_ptr<const KernelMatrix> kernel,
                            const Eigen::VectorXd& labels, double lambda,
                            double audit_tol = 1e-12);

/// RKHS norm of the unregularized empirical-risk gradient at `estimator`:
/// sqrt(d1^T K d1) / n.
double empirical_gradient_norm(const LossModel& loss, const Estimator& estimator,
                               const Eigen::VectorXd& labels);

/// (1/n) sum_i l(y_i, f_i) at the estimator's training predictions.
double empirical_risk(const LossModel& loss, const Estimator& estimator,
                      const Eigen::VectorXd& labels);

}  // namespace itreg
