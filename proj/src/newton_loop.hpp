#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "itreg/prox_newton.hpp"

namespace itreg::detail {

template <typename Vec>
struct NewtonOutcome {
  Vec x;
  double decrement;
  int iterations;
  std::vector<double> objective_trace;  // filled when options.record_objective
};

/// Damped Newton with Armijo backtracking (halving, slope coefficient 1/4);
/// the full step is taken once the decrement is below 0.1. `step(x)` returns
/// {direction, decrement}; the directional derivative along the direction is
/// -decrement^2.
template <typename Vec, typename StepFn, typename ObjectiveFn>
NewtonOutcome<Vec> damped_newton(Vec x, StepFn&& step, ObjectiveFn&& objective,
                                 const NewtonOptions& options) {
  constexpr double kFullStepDecrement = 0.1;
  constexpr double kArmijo = 0.25;
  const double tol = std::max(options.tol, kToleranceFloor);
  std::vector<double> trace;
  for (int iter = 0;; ++iter) {
    if (options.record_objective) trace.push_back(objective(x));
    auto s = step(x);
    if (!std::isfinite(s.decrement)) throw SolverError("Newton decrement is not finite");
    if (s.decrement <= tol) return {std::move(x), s.decrement, iter, std::move(trace)};
    if (iter >= options.max_iter) {
      throw SolverError("Newton solver did not reach decrement " + std::to_string(tol) +
                        " within " + std::to_string(options.max_iter) +
                        " iterations (last decrement " + std::to_string(s.decrement) + ")");
    }
    double t = 1.0;
    if (s.decrement >= kFullStepDecrement) {
      const double f0 = objective(x);
      if (!std::isfinite(f0)) throw SolverError("objective is not finite at the current iterate");
      const double slope = -s.decrement * s.decrement;
      while (true) {
        const double ft = objective(Vec(x + t * s.direction));
        if (std::isfinite(ft) && ft <= f0 + kArmijo * t * slope) break;
        t *= 0.5;
        if (t < 1e-16) throw SolverError("line search failed to decrease the objective");
      }
    }
    x += t * s.direction;
  }
}

}  // namespace itreg::detail
