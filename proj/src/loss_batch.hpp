#pragma once

#include <span>

#include <Eigen/Dense>

#include "itreg/losses.hpp"
#include "itreg/simd.hpp"
#include "itreg/summation.hpp"

namespace itreg::detail {

inline std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}
inline std::span<double> as_span(Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

/// sum_i l(y_i, f_i)
inline double loss_sum(const LossModel& loss, const Eigen::VectorXd& y, const Eigen::VectorXd& f) {
  Eigen::VectorXd values(y.size());
  if (loss.kind == LossKind::logistic) {
    simd::logistic_loss(as_span(y), as_span(f), as_span(values));
  } else {
    values = 0.5 * (y - f).array().square();
  }
  return pairwise_sum(as_span(values));
}

inline void loss_first_second(const LossModel& loss, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& f, Eigen::VectorXd& d1,
                              Eigen::VectorXd& d2) {
  d1.resize(y.size());
  d2.resize(y.size());
  if (loss.kind == LossKind::logistic) {
    simd::logistic_derivatives(as_span(y), as_span(f), as_span(d1), as_span(d2));
  } else {
    d1 = f - y;
    d2.setOnes();
  }
}

}  // namespace itreg::detail
