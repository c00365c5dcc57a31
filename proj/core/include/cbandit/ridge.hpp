#pragma once

#include <utility>

#include "cbandit/types.hpp"

namespace cbandit {

/// Weighted ridge fit for one arm: coefficient estimate, precision matrix
/// B = X^T W X + lambda*I, and coefficient covariance B^{-1} * s where s is
/// the weighted residual sum of squares. The residual scale is kept raw
/// (no degrees-of-freedom normalization); it is only a constant factor of
/// the sampling variance, which is all the policies need.
struct FittedArmModel {
  Vector theta_hat;
  Matrix precision;
  Matrix covariance;
  double regularization = 0.0;
  double residual_scale = 0.0;  ///< s; s0 = 1 when fitted on an empty history

  int dim() const { return static_cast<int>(theta_hat.size()); }
};

/// Closed-form solve of (X^T W X + lambda*I) theta = X^T W r.
/// An empty history yields theta = 0, B = lambda*I and the unit prior scale
/// s0 = 1 so that early sampling stays wide.
FittedArmModel fit_weighted_ridge(const ArmHistory& history, double lambda);

/// As above for histories already assembled into dense form; `dim` is
/// required so the empty case knows its size.
FittedArmModel fit_weighted_ridge(const Matrix& contexts, const Vector& rewards,
                                  const Vector& weights, double lambda, int dim);

/// Conditional mean x.theta and its variance x^T Cov x (clamped at zero).
std::pair<double, double> predict_mean_var(const FittedArmModel& model, const Vector& x);

}  // namespace cbandit
