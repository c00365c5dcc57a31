#include "cbandit/linalg.hpp"

#include <Eigen/Cholesky>

namespace cbandit {

namespace {

// Runs fn(A + jitter*I) with escalating jitter until it reports success.
template <typename Fn>
auto with_jitter(const Matrix& a, int attempts, Fn&& fn) {
  const Eigen::Index d = a.rows();
  if (d != a.cols()) throw ShapeError("spd: matrix must be square");
  double jitter = 0.0;
  const double base = 1e-10 * a.trace() / static_cast<double>(d);
  for (int k = 0; k <= attempts; ++k) {
    Matrix m = a;
    if (jitter > 0.0) m.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() == Eigen::Success) return fn(llt);
    jitter = (jitter == 0.0) ? base : jitter * 10.0;
    if (jitter <= 0.0) break;  // trace <= 0: jitter cannot help
  }
  throw NumericalError("spd: Cholesky factorization failed after jitter escalation");
}

}  // namespace

Matrix spd_cholesky(const Matrix& a, int attempts) {
  return with_jitter(a, attempts, [](const Eigen::LLT<Matrix>& llt) -> Matrix {
    return llt.matrixL();
  });
}

Vector spd_solve(const Matrix& a, const Vector& b, int attempts) {
  if (a.rows() != b.size()) throw ShapeError("spd_solve: dimension mismatch");
  return with_jitter(a, attempts, [&](const Eigen::LLT<Matrix>& llt) -> Vector {
    return llt.solve(b);
  });
}

Matrix spd_solve(const Matrix& a, const Matrix& b, int attempts) {
  if (a.rows() != b.rows()) throw ShapeError("spd_solve: dimension mismatch");
  return with_jitter(a, attempts, [&](const Eigen::LLT<Matrix>& llt) -> Matrix {
    return llt.solve(b);
  });
}

Vector draw_multivariate_normal(const Vector& mean, const Matrix& covariance, Rng& rng) {
  if (covariance.rows() != covariance.cols() || covariance.rows() != mean.size()) {
    throw ShapeError("draw_multivariate_normal: dimension mismatch");
  }
  // A degenerate (all-zero) covariance is legal: the draw is the mean itself.
  if (covariance.isZero(0.0)) return mean;
  return draw_multivariate_normal_chol(mean, spd_cholesky(covariance), rng);
}

Vector draw_multivariate_normal_chol(const Vector& mean, const Matrix& chol_factor, Rng& rng) {
  Vector z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return mean + chol_factor.template triangularView<Eigen::Lower>() * z;
}

}  // namespace cbandit
