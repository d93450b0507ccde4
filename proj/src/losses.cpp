#include "itreg/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace itreg {

std::string_view to_string(LossKind kind) {
  return kind == LossKind::logistic ? "logistic" : "squared";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "logistic") return LossKind::logistic;
  if (name == "squared") return LossKind::squared;
  throw std::invalid_argument("unknown loss '" + std::string(name) +
                              "' (expected logistic or squared)");
}

double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

double softplus(double u) {
  return std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u)));
}

void check_label(const LossModel& model, double y) {
  if (!std::isfinite(y)) throw std::invalid_argument("label must be finite");
  if (model.kind == LossKind::logistic && y != 1.0 && y != -1.0) {
    throw std::invalid_argument(
        "logistic loss expects labels in {-1, +1}; got " + std::to_string(y) +
        " (0/1 encodings are rejected)");
  }
}

double loss_value(const LossModel& model, double y, double z) {
  check_label(model, y);
  if (model.kind == LossKind::logistic) return softplus(-y * z);
  const double r = y - z;
  return 0.5 * r * r;
}

LossDerivatives loss_derivatives(const LossModel& model, double y, double z) {
  check_label(model, y);
  if (model.kind == LossKind::squared) return {z - y, 1.0, 0.0};

  // With m = y z: l = softplus(-m), s = sigmoid(-m).
  //   l'   = -y s
  //   l''  = s (1 - s)
  //   l''' = -y (1 - 2 s) s (1 - s),  and 1 - 2 s = tanh(m / 2).
  const double m = y * z;
  const double s = sigmoid(-m);
  const double c = sigmoid(m);
  const double curv = s * c;
  return {-y * s, curv, -y * std::tanh(0.5 * m) * curv};
}

GscRadius gsc_radius(const LossModel& model, std::span<const double> kernel_diag) {
  if (kernel_diag.empty()) throw std::invalid_argument("gsc_radius: empty kernel diagonal");
  double largest = 0.0;
  for (double k : kernel_diag) {
    if (!(k >= 0.0)) throw std::invalid_argument("gsc_radius: negative kernel diagonal entry");
    largest = std::max(largest, k);
  }
  if (model.kind == LossKind::squared) return {0.0};
  return {std::sqrt(largest)};
}

}  // namespace itreg
