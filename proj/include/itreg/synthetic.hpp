#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "itreg/losses.hpp"

namespace itreg {

/// Synthetic task with planted source parameter r and capacity alpha: inputs
/// uniform on [0, 1], kernel of order alpha, optimum Lambda_{q*}(0, .) with
/// q* = (r + 1/2) alpha + 1/2.
struct TaskSpec {
  LossKind loss_kind = LossKind::logistic;
  double r = 0.25;
  int alpha = 2;
  int n = 100;
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;  ///< regression only

  int theta_star_order() const;
  void validate() const;
};

struct Dataset {
  std::vector<double> inputs;
  std::vector<double> labels;
  std::vector<double> theta_star_values;
  TaskSpec spec;
};

std::vector<double> draw_inputs(std::uint64_t seed, int n);

/// y = +1 with probability sigmoid(theta*(x)), else -1.
Dataset generate_classification(const TaskSpec& spec);
/// y = theta*(x) + noise_sigma * N(0, 1).
Dataset generate_regression(const TaskSpec& spec);
Dataset generate(const TaskSpec& spec);

/// argmin_z  a log(1 + e^-z) + (1 - a) log(1 + e^z)  with a = sigmoid(theta),
/// found by one-dimensional Newton.
double logistic_pointwise_argmin(double theta);

struct OptimalityRow {
  double x = 0.0;
  double theta_star = 0.0;
  double argmin = 0.0;
  double deviation = 0.0;
};

struct OptimalityReport {
  int theta_star_order = 0;
  std::vector<OptimalityRow> rows;
  double max_deviation = 0.0;
};

OptimalityReport verify_optimality(const TaskSpec& spec, std::span<const double> x_probe);

/// `<prefix>.csv` holds `x,y,theta_star` rows; `<prefix>.meta` holds the
/// task as key=value lines.
void write_dataset(const Dataset& data, const std::string& prefix);
Dataset read_dataset(const std::string& prefix);

}  // namespace itreg
