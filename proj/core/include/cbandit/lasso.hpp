#pragma once

#include "cbandit/types.hpp"

namespace cbandit {

struct LassoResult {
  Vector coef;
  bool converged = false;
  int sweeps = 0;
};

inline double soft_threshold(double z, double threshold) {
  if (z > threshold) return z - threshold;
  if (z < -threshold) return z + threshold;
  return 0.0;
}

/// Minimizes (1/2) sum_i w_i (r_i - x_i.theta)^2 + lambda * ||theta||_1
/// by cyclic coordinate descent with residual updates. Stops when the KKT
/// conditions hold within `tol`; past max_sweeps the best iterate is
/// returned with converged = false.
LassoResult lasso_coordinate_descent(const Matrix& contexts, const Vector& rewards,
                                     const Vector& weights, double lambda,
                                     int max_sweeps = 1000, double tol = 1e-7,
                                     const Vector* warm_start = nullptr);

/// Max KKT violation of `coef` for the weighted lasso problem: for zero
/// coordinates the excess of |g_j| over lambda, for active ones
/// |g_j + lambda*sign(coef_j)|, with g the weighted least-squares gradient.
double lasso_kkt_violation(const Matrix& contexts, const Vector& rewards,
                           const Vector& weights, double lambda, const Vector& coef);

}  // namespace cbandit
