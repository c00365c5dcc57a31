#pragma once

#include "cbandit/rng.hpp"
#include "cbandit/types.hpp"

namespace cbandit {

/// Cholesky factor of a symmetric positive-(semi)definite matrix.
/// On factorization failure a diagonal jitter of 1e-10 * trace(A)/d is added
/// and escalated by x10, up to `attempts` tries; NumericalError past that.
Matrix spd_cholesky(const Matrix& a, int attempts = 3);

/// Solve A x = b for SPD A with the same jitter policy.
Vector spd_solve(const Matrix& a, const Vector& b, int attempts = 3);

/// Solve A X = B (matrix right-hand side) for SPD A.
Matrix spd_solve(const Matrix& a, const Matrix& b, int attempts = 3);

/// Draw from N(mean, covariance) as mean + L z with L a (jittered) Cholesky
/// factor and z iid standard normal. A zero covariance returns the mean exactly.
Vector draw_multivariate_normal(const Vector& mean, const Matrix& covariance, Rng& rng);

/// Same draw reusing a precomputed factor L (covariance = L L^T).
Vector draw_multivariate_normal_chol(const Vector& mean, const Matrix& chol_factor, Rng& rng);

}  // namespace cbandit
