#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "itreg/kernels.hpp"
#include "itreg/losses.hpp"

namespace itreg {

/// A function sum_i beta_i Phi(x_i) in the RKHS, represented by its
/// coefficients over the training inputs of `kernel`.
struct Estimator {
  std::shared_ptr<const KernelMatrix> kernel;
  Eigen::VectorXd coefficients;

  static Estimator zero(std::shared_ptr<const KernelMatrix> kernel);

  Eigen::VectorXd training_predictions() const;
  double rkhs_norm_squared() const;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 100;
  bool record_objective = false;  ///< keep the objective at every iterate
};

/// Smallest tolerance accepted by the solvers; tighter requests are raised
/// to this value.
inline constexpr double kToleranceFloor = 1e-12;

/// Outcome of one proximal subproblem solve.
struct SubproblemState {
  Estimator current;
  Estimator reference;
  double lambda = 0.0;
  double decrement = 0.0;
  int iterations = 0;
  std::vector<double> objective_trace;  ///< with NewtonOptions::record_objective
};

/// The proximal subproblem
///   min_beta  (1/n) sum_i l(y_i, (K beta)_i) + (lambda/2) (beta - ref)^T K (beta - ref)
/// in representer coordinates. The Newton system uses the identity
/// (Phi* D Phi / n + lambda)^-1 Phi* = Phi* (D K / n + lambda I)^-1, so each
/// step is one partial-pivot LU of the n x n matrix D K / n + lambda I.
class ProxSubproblem {
 public:
  ProxSubproblem(LossModel loss, std::shared_ptr<const KernelMatrix> kernel,
                 Eigen::VectorXd labels, Eigen::VectorXd reference, double lambda);

  Eigen::Index size() const { return labels_.size(); }
  double lambda() const { return lambda_; }
  const Eigen::VectorXd& reference() const { return reference_; }

  double objective(const Eigen::VectorXd& beta) const;
  /// gamma_i = d1(y_i, f_i) / n + lambda (beta_i - ref_i); the RKHS gradient
  /// is sum_i gamma_i Phi(x_i).
  Eigen::VectorXd gradient_coeffs(const Eigen::VectorXd& beta) const;
  /// sqrt(gamma^T K (D K / n + lambda I)^-1 gamma).
  double newton_decrement(const Eigen::VectorXd& beta) const;

  /// Damped Newton from the reference point until the decrement is <= tol.
  /// Throws SolverError after max_iter iterations or when the line search
  /// cannot find a finite objective.
  SubproblemState solve(const NewtonOptions& options) const;

 private:
  struct Step {
    Eigen::VectorXd gamma;
    Eigen::VectorXd direction;
    double decrement = 0.0;
  };
  Step newton_step(const Eigen::VectorXd& beta) const;
  Eigen::VectorXd predictions(const Eigen::VectorXd& beta) const;

  LossModel loss_;
  std::shared_ptr<const KernelMatrix> kernel_;
  Eigen::VectorXd labels_;
  Eigen::VectorXd reference_;
  double lambda_;
};

/// Same subproblem in the kernel eigenbasis. With K = U diag(s) U^T and
/// features Phi = U_m diag(sqrt(s_m)), the function is Phi w and its RKHS
/// norm is |w|; the Newton system is the m x m SPD matrix
/// Phi^T D Phi / n + lambda I, factored by Cholesky.
///
/// Directions with s_j / n < rank_tolerance * lambda are dropped (their
/// spectral filter factor is at most t * rank_tolerance). rank_tolerance = 0
/// keeps every numerically nonzero eigenvalue and reproduces the
/// coefficient-space solver on the range of K.
class EigenbasisProx {
 public:
  EigenbasisProx(LossModel loss, std::shared_ptr<const KernelMatrix> kernel,
                 Eigen::VectorXd labels, double lambda, double rank_tolerance = 0.0);

  Eigen::Index rank() const { return features_.cols(); }
  double lambda() const { return lambda_; }

  Eigen::VectorXd to_coefficients(const Eigen::VectorXd& w) const;
  Eigen::VectorXd from_coefficients(const Eigen::VectorXd& beta) const;

  double objective(const Eigen::VectorXd& w, const Eigen::VectorXd& w_ref) const;
  double newton_decrement(const Eigen::VectorXd& w, const Eigen::VectorXd& w_ref) const;

  struct Result {
    Eigen::VectorXd w;
    double decrement = 0.0;
    int iterations = 0;
  };
  Result solve(const Eigen::VectorXd& w_ref, const NewtonOptions& options) const;

 private:
  struct Step {
    Eigen::VectorXd direction;
    double decrement = 0.0;
  };
  Step newton_step(const Eigen::VectorXd& w, const Eigen::VectorXd& w_ref) const;

  LossModel loss_;
  std::shared_ptr<const KernelMatrix> kernel_;
  Eigen::VectorXd labels_;
  double lambda_;
  Eigen::MatrixXd features_;      // n x m
  Eigen::VectorXd inv_sqrt_eig_;  // m
};

}  // namespace itreg
