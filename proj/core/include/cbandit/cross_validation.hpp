#pragma once

#include <functional>
#include <vector>

#include "cbandit/rng.hpp"
#include "cbandit/types.hpp"

namespace cbandit {

/// Fits a coefficient vector on (X, r, w) at a given penalty.
using PenalizedFit =
    std::function<Vector(const Matrix&, const Vector&, const Vector&, double lambda)>;

/// k-fold cross-validation over a penalty grid, minimizing weighted squared
/// validation error. With fewer than 10 observations the (lower) median grid
/// value is returned; ties in validation error go to the smaller penalty.
double cross_validate_lambda(const Matrix& contexts, const Vector& rewards,
                             const Vector& weights, const std::vector<double>& grid,
                             int folds, Rng& rng, const PenalizedFit& fit);

}  // namespace cbandit
