#include "cbandit/ridge.hpp"

#include <algorithm>
#include <string>

#include "cbandit/linalg.hpp"

namespace cbandit {

FittedArmModel fit_weighted_ridge(const Matrix& contexts, const Vector& rewards,
                                  const Vector& weights, double lambda, int dim) {
  if (lambda <= 0.0) throw ParameterError("fit_weighted_ridge: lambda must be positive");
  const Eigen::Index n = contexts.rows();
  if (rewards.size() != n || weights.size() != n) {
    throw ShapeError("fit_weighted_ridge: contexts, rewards and weights must have equal length");
  }
  if (n > 0 && contexts.cols() != dim) {
    throw ShapeError("fit_weighted_ridge: context dimension mismatch");
  }

  FittedArmModel model;
  model.regularization = lambda;

  if (n == 0) {
    model.theta_hat = Vector::Zero(dim);
    model.precision = lambda * Matrix::Identity(dim, dim);
    model.residual_scale = 1.0;  // unit prior scale, keeps sampling non-degenerate
    model.covariance = spd_solve(model.precision, Matrix::Identity(dim, dim)) * model.residual_scale;
    model.covariance = 0.5 * (model.covariance + model.covariance.transpose()).eval();
    return model;
  }

  const Matrix xw = contexts.transpose() * weights.asDiagonal();  // d x n
  Matrix b = xw * contexts;
  b.diagonal().array() += lambda;
  model.precision = 0.5 * (b + b.transpose());

  const Vector xtwr = xw * rewards;
  model.theta_hat = spd_solve(model.precision, xtwr);

  const Vector residuals = rewards - contexts * model.theta_hat;
  model.residual_scale = residuals.cwiseProduct(weights).dot(residuals);
  model.covariance =
      spd_solve(model.precision, Matrix::Identity(dim, dim)) * model.residual_scale;
  model.covariance = 0.5 * (model.covariance + model.covariance.transpose()).eval();
  return model;
}

FittedArmModel fit_weighted_ridge(const ArmHistory& history, double lambda) {
  history.check_consistent();
  return fit_weighted_ridge(history.context_matrix(), history.reward_vector(),
                            history.weight_vector(), lambda, history.dim);
}

std::pair<double, double> predict_mean_var(const FittedArmModel& model, const Vector& x) {
  if (x.size() != model.theta_hat.size()) {
    throw ShapeError("predict_mean_var: context has dimension " + std::to_string(x.size()) +
                     ", model expects " + std::to_string(model.theta_hat.size()));
  }
  const double mu = x.dot(model.theta_hat);
  const double s2 = x.dot(model.covariance * x);
  return {mu, std::max(0.0, s2)};
}

}  // namespace cbandit
