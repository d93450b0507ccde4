#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>
#include <stdexcept>
#include <vector>

#include "itreg/prox_newton.hpp"
#include "oracles.hpp"

using namespace itreg;

namespace {

std::vector<double> uniform_inputs(int n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(n));
  for (auto& v : x) v = u(gen);
  return x;
}

Eigen::VectorXd sign_labels(int n, unsigned seed) {
  std::mt19937_64 gen(seed);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = (gen() & 1) ? 1.0 : -1.0;
  return y;
}

Eigen::VectorXd gaussian(int n, unsigned seed, double scale = 1.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g(0.0, scale);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = g(gen);
  return v;
}

std::shared_ptr<const KernelMatrix> make_kernel(int q, std::vector<double> x) {
  return std::make_shared<const KernelMatrix>(KernelSpec{q}, std::move(x));
}

// Decrement through the explicit feature map Phi = U S^(1/2): the RKHS
// gradient is Phi^T gamma and the Hessian Phi^T D Phi / n + lambda I.
double decrement_via_features(const Eigen::MatrixXd& k, const Eigen::VectorXd& gamma,
                              const Eigen::VectorXd& d2, double lambda) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
  const Eigen::VectorXd s = es.eigenvalues().cwiseMax(0.0);
  const Eigen::MatrixXd phi = es.eigenvectors() * s.cwiseSqrt().asDiagonal();
  const double n = static_cast<double>(k.rows());
  Eigen::MatrixXd h = phi.transpose() * d2.asDiagonal() * phi / n;
  h.diagonal().array() += lambda;
  const Eigen::VectorXd g = phi.transpose() * gamma;
  return std::sqrt(g.dot(h.ldlt().solve(g)));
}

}  // namespace

TEST_CASE("estimator basics") {
  auto k = make_kernel(2, uniform_inputs(12, 1));
  auto est = Estimator::zero(k);
  CHECK(est.coefficients.norm() == 0.0);
  est.coefficients = gaussian(12, 2);
  CHECK((est.training_predictions() - k->entries() * est.coefficients).norm() == 0.0);
  CHECK(est.rkhs_norm_squared() >= -1e-10);
}

TEST_CASE("one-point subproblem against its closed form") {
  auto k = make_kernel(2, {0.3});
  Eigen::VectorXd y(1), ref(1), beta(1);
  y << 1.0;
  ref << 0.2;
  beta << 0.6;
  const ProxSubproblem sub(LossModel{LossKind::logistic}, k, y, ref, 0.5);
  CHECK(sub.gradient_coeffs(beta)[0] == doctest::Approx(-0.14298953732650121407).epsilon(1e-14));
  CHECK(sub.newton_decrement(beta) == doctest::Approx(0.17252890773571704686).epsilon(1e-14));
  CHECK(sub.objective(beta) == doctest::Approx(0.46338866903604854516).epsilon(1e-14));
}

TEST_CASE("gradient vanishes at the ridge solution and at a fixed point") {
  const int n = 40;
  auto k = make_kernel(4, uniform_inputs(n, 3));
  const Eigen::VectorXd y = gaussian(n, 4);
  const Eigen::VectorXd ref = gaussian(n, 5, 0.1);
  const double lambda = 1e-2;
  const ProxSubproblem sub(LossModel{LossKind::squared}, k, y, ref, lambda);
  const Eigen::VectorXd beta = oracle::ridge(k->entries(), y, lambda, ref);
  CHECK(sub.gradient_coeffs(beta).cwiseAbs().maxCoeff() <= 1e-9);

  // Labels equal to the reference's predictions: d1 = 0 and beta = ref.
  const Eigen::VectorXd fit = k->entries() * ref;
  const ProxSubproblem still(LossModel{LossKind::squared}, k, fit, ref, lambda);
  CHECK(still.gradient_coeffs(ref).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(still.newton_decrement(ref) <= 1e-15);
}

TEST_CASE("squared-loss decrement against the eigendecomposition") {
  const int n = 60;
  auto k = make_kernel(2, uniform_inputs(n, 6));
  const Eigen::VectorXd y = gaussian(n, 7);
  const double lambda = 3e-3;
  const ProxSubproblem sub(LossModel{LossKind::squared}, k, y, Eigen::VectorXd::Zero(n), lambda);
  const Eigen::VectorXd beta = gaussian(n, 8, 0.2);
  const Eigen::VectorXd gamma = sub.gradient_coeffs(beta);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k->entries());
  const Eigen::VectorXd s = es.eigenvalues();
  const Eigen::VectorXd ug = es.eigenvectors().transpose() * gamma;
  double dec2 = 0.0;
  for (int i = 0; i < n; ++i) dec2 += ug[i] * ug[i] * s[i] / (s[i] / n + lambda);
  CHECK(oracle::rel_err(sub.newton_decrement(beta), std::sqrt(dec2)) <= 1e-8);
  CHECK(sub.newton_decrement(oracle::ridge(k->entries(), y, lambda, Eigen::VectorXd::Zero(n))) <= 1e-9);
}

TEST_CASE("logistic decrement against the explicit feature-space Hessian") {
  const int n = 50;
  auto k = make_kernel(2, uniform_inputs(n, 9));
  const Eigen::VectorXd y = sign_labels(n, 10);
  const Eigen::VectorXd ref = gaussian(n, 11, 0.5);
  const double lambda = 2e-2;
  const ProxSubproblem sub(LossModel{LossKind::logistic}, k, y, ref, lambda);
  const Eigen::VectorXd beta = gaussian(n, 12, 0.5);
  const Eigen::VectorXd f = k->entries() * beta;
  Eigen::VectorXd d2(n);
  for (int i = 0; i < n; ++i) d2[i] = loss_derivatives(LossModel{LossKind::logistic}, y[i], f[i]).d2;
  const double want = decrement_via_features(k->entries(), sub.gradient_coeffs(beta), d2, lambda);
  CHECK(oracle::rel_err(sub.newton_decrement(beta), want) <= 1e-8);
}

TEST_CASE("decrement ignores null-space directions of K") {
  // Repeated inputs make K rank deficient; v with K v = 0 changes gamma by
  // lambda v and nothing else.
  auto k = make_kernel(2, {0.2, 0.2, 0.7, 0.7, 0.45});
  Eigen::VectorXd v(5);
  v << 1.0, -1.0, 0.0, 0.0, 0.0;
  REQUIRE((k->entries() * v).norm() < 1e-14);
  Eigen::VectorXd y(5);
  y << 1, -1, 1, 1, -1;
  const ProxSubproblem sub(LossModel{LossKind::logistic}, k, y, Eigen::VectorXd::Zero(5), 0.1);
  Eigen::VectorXd beta(5);
  beta << 0.3, -0.2, 0.5, 0.1, -0.4;
  CHECK(sub.newton_decrement(beta + 3.0 * v) == doctest::Approx(sub.newton_decrement(beta)).epsilon(1e-10));
}

TEST_CASE("squared-loss solve reproduces ridge regression") {
  const int n = 80;
  auto k = make_kernel(2, uniform_inputs(n, 13));
  const Eigen::VectorXd y = gaussian(n, 14);
  for (double lambda : {1e-3, 1e-1}) {
    const ProxSubproblem sub(LossModel{LossKind::squared}, k, y, Eigen::VectorXd::Zero(n), lambda);
    const auto state = sub.solve({1e-10, 100});
    const Eigen::VectorXd want = oracle::ridge(k->entries(), y, lambda, Eigen::VectorXd::Zero(n));
    CHECK(oracle::rel_err(state.current.coefficients, want) <= 1e-8);
    CHECK(state.decrement <= 1e-10);
  }
}

TEST_CASE("logistic solve reaches the tolerance with a nonincreasing objective") {
  const int n = 100;
  auto k = make_kernel(2, uniform_inputs(n, 15));
  const Eigen::VectorXd y = sign_labels(n, 16);
  for (double lambda : {1e-4, 1e-2, 1.0}) {
    const ProxSubproblem sub(LossModel{LossKind::logistic}, k, y, Eigen::VectorXd::Zero(n), lambda);
    NewtonOptions opts{1e-10, 100, true};
    const auto state = sub.solve(opts);
    CHECK(state.decrement <= 1e-10);
    CHECK(sub.newton_decrement(state.current.coefficients) == doctest::Approx(state.decrement));
    REQUIRE(state.objective_trace.size() == static_cast<std::size_t>(state.iterations + 1));
    for (std::size_t i = 1; i < state.objective_trace.size(); ++i) {
      CHECK(state.objective_trace[i] <= state.objective_trace[i - 1]);
    }
  }
}

TEST_CASE("prox at an exact empirical-risk minimizer returns the reference") {
  // Three distinct inputs, each seen with both labels, so the empirical
  // risk has a finite minimizer: f(x) = logit of the label frequency at x.
  auto k = make_kernel(2, {0.1, 0.1, 0.1, 0.5, 0.5, 0.5, 0.8, 0.8});
  Eigen::VectorXd y(8);
  y << 1, 1, -1, 1, -1, -1, 1, -1;
  Eigen::Matrix3d kd;
  const double xs[3] = {0.1, 0.5, 0.8};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) kd(i, j) = oracle::spline_kernel(2, xs[i], xs[j]);
  const Eigen::Vector3d target(std::log(2.0), -std::log(2.0), 0.0);
  const Eigen::Vector3d c = kd.fullPivLu().solve(target);
  Eigen::VectorXd ref = Eigen::VectorXd::Zero(8);
  ref[0] = c[0];
  ref[3] = c[1];
  ref[6] = c[2];

  const ProxSubproblem sub(LossModel{LossKind::logistic}, k, y, ref, 0.05);
  CHECK(sub.newton_decrement(ref) <= 1e-14);
  const auto state = sub.solve({1e-10, 100});
  CHECK(state.iterations == 0);
  CHECK((state.current.coefficients - ref).norm() == 0.0);
}

TEST_CASE("squared-loss prox is nonexpansive in the RKHS norm") {
  const int n = 50;
  auto k = make_kernel(2, uniform_inputs(n, 17));
  const Eigen::VectorXd y = gaussian(n, 18);
  const auto knorm = [&](const Eigen::VectorXd& b) { return std::sqrt(b.dot(k->entries() * b)); };
  for (unsigned trial = 0; trial < 5; ++trial) {
    const Eigen::VectorXd a = gaussian(n, 100 + trial);
    const Eigen::VectorXd b = gaussian(n, 200 + trial);
    const auto pa = ProxSubproblem(LossModel{LossKind::squared}, k, y, a, 1e-2).solve({1e-12, 100});
    const auto pb = ProxSubproblem(LossModel{LossKind::squared}, k, y, b, 1e-2).solve({1e-12, 100});
    CHECK(knorm(pa.current.coefficients - pb.current.coefficients) <= knorm(a - b) + 1e-8);
  }
}

TEST_CASE("eigenbasis solver matches the coefficient solver without truncation") {
  const int n = 90;
  auto k = make_kernel(2, uniform_inputs(n, 19));
  const Eigen::VectorXd y = sign_labels(n, 20);
  const LossModel loss{LossKind::logistic};
  for (double lambda : {1e-3, 1e-1}) {
    const ProxSubproblem lu(loss, k, y, Eigen::VectorXd::Zero(n), lambda);
    const auto ref_state = lu.solve({1e-11, 100});
    const EigenbasisProx eig(loss, k, y, lambda, 0.0);
    const auto res = eig.solve(Eigen::VectorXd::Zero(eig.rank()), {1e-11, 100});
    const Eigen::VectorXd f_lu = k->entries() * ref_state.current.coefficients;
    const Eigen::VectorXd f_eig = k->entries() * eig.to_coefficients(res.w);
    CHECK(oracle::rel_err(f_eig, f_lu) <= 1e-8);
    // The same point has the same decrement in both parameterizations.
    CHECK(lu.newton_decrement(eig.to_coefficients(res.w)) <= 1e-9);
  }
}

TEST_CASE("eigenbasis truncation keeps the large eigen-directions") {
  const int n = 200;
  auto k = make_kernel(2, uniform_inputs(n, 21));
  const Eigen::VectorXd y = sign_labels(n, 22);
  const EigenbasisProx full(LossModel{LossKind::logistic}, k, y, 1e-2, 0.0);
  const EigenbasisProx cut(LossModel{LossKind::logistic}, k, y, 1e-2, 1e-2);
  CHECK(cut.rank() < full.rank());
  const double cutoff = 1e-2 * 1e-2 * n;
  for (Eigen::Index j = 0; j < cut.rank(); ++j) CHECK(k->eigenvalues()[j] >= cutoff);
}

TEST_CASE("argument validation and solver failures") {
  auto k = make_kernel(2, {0.1, 0.6});
  Eigen::VectorXd y(2);
  y << 1, -1;
  CHECK_THROWS_AS(ProxSubproblem(LossModel{LossKind::logistic}, k, y, Eigen::VectorXd::Zero(2), 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(ProxSubproblem(LossModel{LossKind::logistic}, k, y, Eigen::VectorXd::Zero(3), 1.0),
                  std::invalid_argument);
  Eigen::VectorXd bad(2);
  bad << 1, 0;
  CHECK_THROWS_AS(ProxSubproblem(LossModel{LossKind::logistic}, k, bad, Eigen::VectorXd::Zero(2), 1.0),
                  std::invalid_argument);

  // One iteration cannot reach 1e-12 from far away.
  const auto far = make_kernel(2, uniform_inputs(30, 23));
  const ProxSubproblem sub(LossModel{LossKind::logistic}, far, sign_labels(30, 24),
                           Eigen::VectorXd::Zero(30), 1e-4);
  CHECK_THROWS_AS(sub.solve({1e-12, 1}), SolverError);
}
