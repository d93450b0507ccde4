#pragma once

#include <span>
#include <string>
#include <string_view>

namespace itreg {

enum class LossKind { logistic, squared };

std::string_view to_string(LossKind kind);
LossKind parse_loss_kind(std::string_view name);

/// A generalized self-concordant loss l(y, z) seen as a function of the
/// scalar prediction z. Logistic takes labels in {-1, +1}, squared takes
/// any finite real label.
struct LossModel {
  LossKind kind = LossKind::squared;
};

struct LossDerivatives {
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
};

/// Bound R on the norm of the self-concordance set. Zero for squared loss.
struct GscRadius {
  double R = 0.0;
};

/// Throws std::invalid_argument when `y` is not a valid label for the loss.
void check_label(const LossModel& model, double y);

double loss_value(const LossModel& model, double y, double z);
LossDerivatives loss_derivatives(const LossModel& model, double y, double z);

/// Largest sqrt(K(x_i, x_i)) for logistic, 0 for squared.
GscRadius gsc_radius(const LossModel& model, std::span<const double> kernel_diag);

// Numerically stable scalar helpers shared across modules.
double sigmoid(double u);
double softplus(double u);

}  // namespace itreg
