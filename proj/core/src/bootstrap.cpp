#include "cbandit/bootstrap.hpp"

#include <algorithm>
#include <cmath>

#include "cbandit/cross_validation.hpp"
#include "cbandit/lasso.hpp"
#include "cbandit/ridge.hpp"

namespace cbandit {

std::pair<double, double> BootstrapEnsemble::predict_mean_var(const Vector& x) const {
  if (coefficient_samples.size() < 2) {
    throw StateError("BootstrapEnsemble: need at least two samples");
  }
  double mean = 0.0;
  std::vector<double> predictions;
  predictions.reserve(coefficient_samples.size());
  for (const auto& theta : coefficient_samples) {
    predictions.push_back(x.dot(theta));
    mean += predictions.back();
  }
  mean /= static_cast<double>(predictions.size());
  double var = 0.0;
  for (double p : predictions) var += (p - mean) * (p - mean);
  var /= static_cast<double>(predictions.size() - 1);
  return {mean, var};
}

namespace {

Vector fit_resample(const Matrix& contexts, const Vector& rewards, const Vector& weights,
                    GlmSolver solver, double lambda, const Vector* warm) {
  if (solver == GlmSolver::Ridge) {
    return fit_weighted_ridge(contexts, rewards, weights, lambda,
                              static_cast<int>(contexts.cols()))
        .theta_hat;
  }
  return lasso_coordinate_descent(contexts, rewards, weights, lambda, 1000, 1e-7, warm).coef;
}

}  // namespace

BootstrapEnsemble bootstrap_posterior(const ArmHistory& history, GlmSolver solver, double lambda,
                                      int b_boot, Rng& rng) {
  if (history.empty()) throw StateError("bootstrap_posterior: history is empty");
  if (b_boot < 2) throw ParameterError("bootstrap_posterior: b_boot must be >= 2");
  history.check_consistent();

  const Matrix contexts = history.context_matrix();
  const Vector rewards = history.reward_vector();
  const Vector weights = history.weight_vector();
  const Eigen::Index n = contexts.rows();

  BootstrapEnsemble ensemble;
  ensemble.solver = solver;
  ensemble.lambda = lambda;
  ensemble.coefficient_samples.reserve(static_cast<std::size_t>(b_boot));

  std::vector<int> counts(static_cast<std::size_t>(n));
  Vector warm = Vector::Zero(contexts.cols());
  for (int b = 0; b < b_boot; ++b) {
    Vector coef;
    bool ok = false;
    for (int attempt = 0; attempt < 10 && !ok; ++attempt) {
      std::fill(counts.begin(), counts.end(), 0);
      for (Eigen::Index i = 0; i < n; ++i) {
        ++counts[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(n)))];
      }
      // Resampled rows keep their balancing weights; the multiplicity folds
      // into the weight so solvers see each distinct row once.
      Eigen::Index kept = 0;
      for (int c : counts) kept += (c > 0);
      Matrix xs(kept, contexts.cols());
      Vector rs(kept), ws(kept);
      Eigen::Index row = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (counts[static_cast<std::size_t>(i)] == 0) continue;
        xs.row(row) = contexts.row(i);
        rs[row] = rewards[i];
        ws[row] = weights[i] * counts[static_cast<std::size_t>(i)];
        ++row;
      }
      coef = fit_resample(xs, rs, ws, solver, lambda, &warm);
      ok = coef.allFinite();
    }
    if (!ok) {
      ensemble.degenerate = true;
      coef = Vector::Zero(contexts.cols());
    }
    warm = coef;
    ensemble.coefficient_samples.push_back(std::move(coef));
  }
  return ensemble;
}

void BootstrapTsConfig::validate() const {
  if (b_boot < 2) throw ParameterError("BootstrapTsConfig: b_boot must be >= 2");
  if (refit_cadence < 1) throw ParameterError("BootstrapTsConfig: refit_cadence must be >= 1");
  if (alpha < 0.0) throw ParameterError("BootstrapTsConfig: alpha must be >= 0");
  if (cv_folds < 2) throw ParameterError("BootstrapTsConfig: cv_folds must be >= 2");
  for (double l : lambda_grid) {
    if (l <= 0.0) throw ParameterError("BootstrapTsConfig: lambda_grid values must be positive");
  }
}

std::vector<double> BootstrapTsConfig::default_grid(GlmSolver solver, bool relative) {
  if (solver == GlmSolver::Lasso && relative) return {0.01, 0.05, 0.1, 0.25};
  return {0.05, 0.5, 5.0};
}

BootstrapTsPolicy::BootstrapTsPolicy(BootstrapTsConfig config, int num_arms, int dim)
    : config_(std::move(config)), num_arms_(num_arms), dim_(dim) {
  if (config_.lambda_grid.empty()) {
    config_.lambda_grid = BootstrapTsConfig::default_grid(
        config_.solver, config_.lambda_grid_relative && config_.solver == GlmSolver::Lasso);
  }
  if (config_.solver == GlmSolver::Ridge) config_.lambda_grid_relative = false;
  config_.validate();
  if (num_arms_ < 1) throw ParameterError("BootstrapTsPolicy: need at least one arm");
  if (dim_ < 1) throw ParameterError("BootstrapTsPolicy: context dimension must be >= 1");
  for (int a = 0; a < num_arms_; ++a) histories_.emplace_back(a, dim_);
  ensembles_.resize(static_cast<std::size_t>(num_arms_));
  fitted_rows_.assign(static_cast<std::size_t>(num_arms_), 0);
}

int BootstrapTsPolicy::select_arm(const Vector& x, Rng& rng) {
  if (x.size() != dim_) throw ShapeError("BootstrapTsPolicy::select_arm: dimension mismatch");
  for (const auto& e : ensembles_) {
    if (!e.has_value()) return rng.uniform_int(num_arms_);
  }

  int pick = 0;
  double best = -std::numeric_limits<double>::infinity();
  int ties = 0;
  for (int a = 0; a < num_arms_; ++a) {
    const auto& ensemble = *ensembles_[static_cast<std::size_t>(a)];
    double score;
    if (config_.draw == BootstrapTsConfig::DrawMode::Member) {
      const int member = rng.uniform_int(static_cast<int>(ensemble.coefficient_samples.size()));
      score = x.dot(ensemble.coefficient_samples[static_cast<std::size_t>(member)]);
    } else {
      const auto [mu, var] = ensemble.predict_mean_var(x);
      const double sd = config_.alpha * std::sqrt(std::max(0.0, var));
      score = sd > 0.0 ? rng.normal(mu, sd) : mu;
    }
    if (score > best) {
      best = score;
      pick = a;
      ties = 1;
    } else if (score == best) {
      ++ties;
      if (rng.uniform_int(ties) == 0) pick = a;
    }
  }
  return pick;
}

void BootstrapTsPolicy::refit_arm(int arm, Rng& rng) {
  ArmHistory& history = histories_[static_cast<std::size_t>(arm)];
  const Matrix contexts = history.context_matrix();
  const Vector rewards = history.reward_vector();
  const Vector weights = history.weight_vector();

  std::vector<double> grid = config_.lambda_grid;
  if (config_.solver == GlmSolver::Lasso && config_.lambda_grid_relative) {
    const double lambda_max =
        (contexts.transpose() * rewards.cwiseProduct(weights)).cwiseAbs().maxCoeff();
    const double scale = std::max(lambda_max, 1e-12);
    for (double& g : grid) g *= scale;
  }

  const auto fit = [this](const Matrix& xs, const Vector& rs, const Vector& ws, double l) {
    return fit_resample(xs, rs, ws, config_.solver, l, nullptr);
  };
  const double lambda =
      cross_validate_lambda(contexts, rewards, weights, grid, config_.cv_folds, rng, fit);

  ensembles_[static_cast<std::size_t>(arm)] =
      bootstrap_posterior(history, config_.solver, lambda, config_.b_boot, rng);
  fitted_rows_[static_cast<std::size_t>(arm)] = history.size();
}

void BootstrapTsPolicy::update(const Vector& x, int arm, double reward, Rng& rng) {
  if (x.size() != dim_) throw ShapeError("BootstrapTsPolicy::update: dimension mismatch");
  if (arm < 0 || arm >= num_arms_) throw ParameterError("BootstrapTsPolicy::update: bad arm");
  histories_[static_cast<std::size_t>(arm)].append(x, reward, 1.0);
  ++step_;

  const bool first_fit = !ensembles_[static_cast<std::size_t>(arm)].has_value();
  if (first_fit) {
    refit_arm(arm, rng);
    return;
  }
  if (step_ % config_.refit_cadence != 0) return;
  for (int a = 0; a < num_arms_; ++a) {
    if (histories_[static_cast<std::size_t>(a)].size() > fitted_rows_[static_cast<std::size_t>(a)]) {
      refit_arm(a, rng);
    }
  }
}

void BootstrapTsPolicy::seed_history(const std::vector<Vector>& contexts,
                                     const std::vector<int>& arms,
                                     const std::vector<double>& rewards, Rng& rng) {
  if (contexts.size() != arms.size() || contexts.size() != rewards.size()) {
    throw ShapeError("BootstrapTsPolicy::seed_history: inputs must have equal length");
  }
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    histories_.at(static_cast<std::size_t>(arms[i])).append(contexts[i], rewards[i], 1.0);
    ++step_;
  }
  for (int a = 0; a < num_arms_; ++a) {
    if (!histories_[static_cast<std::size_t>(a)].empty()) refit_arm(a, rng);
  }
}

std::optional<std::pair<double, double>> BootstrapTsPolicy::predict(int arm,
                                                                    const Vector& x) const {
  const auto& e = ensembles_.at(static_cast<std::size_t>(arm));
  if (!e.has_value()) return std::nullopt;
  return e->predict_mean_var(x);
}

const std::optional<BootstrapEnsemble>& BootstrapTsPolicy::ensemble(int arm) const {
  return ensembles_.at(static_cast<std::size_t>(arm));
}

const ArmHistory& BootstrapTsPolicy::arm_history(int arm) const {
  return histories_.at(static_cast<std::size_t>(arm));
}

}  // namespace cbandit
