#include "cbandit/propensity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cbandit {

double clip_to_weight(double p, double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw ParameterError("clip_to_weight: gamma must lie in (0, 1]");
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ParameterError("clip_to_weight: p must lie in [0, 1]");
  }
  return 1.0 / std::max(gamma, p);
}

void PropensityTable::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw ParameterError("PropensityTable: gamma must lie in (0, 1]");
  }
  for (Eigen::Index i = 0; i < probabilities.rows(); ++i) {
    double row_sum = 0.0;
    for (Eigen::Index a = 0; a < probabilities.cols(); ++a) {
      const double p = probabilities(i, a);
      if (!(p >= 0.0 && p <= 1.0)) {
        throw ParameterError("PropensityTable: probability outside [0, 1]");
      }
      row_sum += p;
    }
    if (std::abs(row_sum - 1.0) > 1e-6) {
      throw ParameterError("PropensityTable: row " + std::to_string(i) +
                           " sums to " + std::to_string(row_sum));
    }
  }
}

double PropensityTable::weight_for(Eigen::Index observation, int arm) const {
  return clip_to_weight(probabilities(observation, arm), gamma);
}

Vector ts_propensity_mc_table(const Matrix& means, const Matrix& sds, int n_draws, Rng& rng) {
  if (n_draws < 1) throw ParameterError("ts_propensity_mc: n_draws must be >= 1");
  const Eigen::Index n_snapshots = means.rows();
  const Eigen::Index n_arms = means.cols();
  if (n_snapshots == 0) throw StateError("ts_propensity_mc: empty snapshot store");
  if (sds.rows() != n_snapshots || sds.cols() != n_arms) {
    throw ShapeError("ts_propensity_mc: means/sds tables must have equal shape");
  }

  std::vector<long> counts(static_cast<std::size_t>(n_arms), 0);
  for (int it = 0; it < n_draws; ++it) {
    const int s = n_snapshots == 1 ? 0 : rng.uniform_int(static_cast<int>(n_snapshots));
    int pick = 0;
    double best = -std::numeric_limits<double>::infinity();
    int ties = 0;
    for (Eigen::Index a = 0; a < n_arms; ++a) {
      const double sd = sds(s, a);
      const double y = sd > 0.0 ? means(s, a) + sd * rng.normal() : means(s, a);
      if (y > best) {
        best = y;
        pick = static_cast<int>(a);
        ties = 1;
      } else if (y == best) {
        ++ties;
        if (rng.uniform_int(ties) == 0) pick = static_cast<int>(a);
      }
    }
    ++counts[static_cast<std::size_t>(pick)];
  }

  Vector freq(n_arms);
  for (Eigen::Index a = 0; a < n_arms; ++a) {
    freq[a] = static_cast<double>(counts[static_cast<std::size_t>(a)]) /
              static_cast<double>(n_draws);
  }
  return freq;
}

Vector ts_propensity_mc(std::span<const ModelSnapshot> snapshots, const Vector& x,
                        double alpha, int n_draws, Rng& rng) {
  if (snapshots.empty()) throw StateError("ts_propensity_mc: empty snapshot store");
  if (alpha < 0.0) throw ParameterError("ts_propensity_mc: alpha must be non-negative");
  const Eigen::Index n_arms = static_cast<Eigen::Index>(snapshots.front().models.size());
  Matrix means(static_cast<Eigen::Index>(snapshots.size()), n_arms);
  Matrix sds(static_cast<Eigen::Index>(snapshots.size()), n_arms);
  for (std::size_t s = 0; s < snapshots.size(); ++s) {
    if (static_cast<Eigen::Index>(snapshots[s].models.size()) != n_arms) {
      throw ShapeError("ts_propensity_mc: snapshots disagree on arm count");
    }
    for (Eigen::Index a = 0; a < n_arms; ++a) {
      const auto [mu, s2] = predict_mean_var(snapshots[s].models[static_cast<std::size_t>(a)], x);
      means(static_cast<Eigen::Index>(s), a) = mu;
      sds(static_cast<Eigen::Index>(s), a) = alpha * std::sqrt(s2);
    }
  }
  return ts_propensity_mc_table(means, sds, n_draws, rng);
}

namespace {

// Regularized multinomial log-likelihood and gradient; logits stabilized by
// the row max before exponentiation.
double logit_objective(const Matrix& contexts, const std::vector<int>& arms, double l2,
                       const Matrix& weights, Matrix* grad) {
  const Eigen::Index n = contexts.rows();
  const Eigen::Index k = weights.rows();
  double ll = 0.0;
  if (grad) grad->setZero();
  Vector logits(k), probs(k);
  for (Eigen::Index i = 0; i < n; ++i) {
    logits.noalias() = weights * contexts.row(i).transpose();
    const double m = logits.maxCoeff();
    probs = (logits.array() - m).exp();
    const double z = probs.sum();
    probs /= z;
    ll += logits[arms[static_cast<std::size_t>(i)]] - m - std::log(z);
    if (grad) {
      grad->row(arms[static_cast<std::size_t>(i)]) += contexts.row(i);
      grad->noalias() -= probs * contexts.row(i);
    }
  }
  ll -= 0.5 * l2 * weights.squaredNorm();
  if (grad) *grad -= l2 * weights;
  return ll;
}

}  // namespace

Vector MultinomialLogit::predict_proba(const Vector& x) const {
  if (x.size() != weights.cols()) {
    throw ShapeError("MultinomialLogit::predict_proba: context dimension mismatch");
  }
  Vector logits = weights * x;
  const double m = logits.maxCoeff();
  Vector probs = (logits.array() - m).exp();
  probs /= probs.sum();
  return probs;
}

MultinomialLogit fit_multinomial_logit(const Matrix& contexts, const std::vector<int>& arms,
                                       int num_arms, double l2, int max_iter, double tol,
                                       const MultinomialLogit* warm_start) {
  const Eigen::Index n = contexts.rows();
  const Eigen::Index d = contexts.cols();
  if (static_cast<Eigen::Index>(arms.size()) != n) {
    throw ShapeError("fit_multinomial_logit: contexts and arms must align");
  }
  if (num_arms < 1) throw ParameterError("fit_multinomial_logit: num_arms must be >= 1");
  if (l2 < 0.0) throw ParameterError("fit_multinomial_logit: l2 must be >= 0");
  for (int a : arms) {
    if (a < 0 || a >= num_arms) throw ParameterError("fit_multinomial_logit: arm out of range");
  }

  MultinomialLogit fit;
  fit.weights = (warm_start && warm_start->weights.rows() == num_arms &&
                 warm_start->weights.cols() == d)
                    ? warm_start->weights
                    : Matrix::Zero(num_arms, d);

  Matrix grad(num_arms, d), trial_grad(num_arms, d);
  double objective = logit_objective(contexts, arms, l2, fit.weights, &grad);
  fit.grad_norm = grad.norm();

  // Nesterov acceleration with backtracking and objective-based restart.
  Matrix current = fit.weights;
  Matrix lookahead = current;
  double momentum = 1.0;
  double step = 1.0;

  for (int iter = 1; iter <= max_iter && fit.grad_norm > tol; ++iter) {
    const double reference = logit_objective(contexts, arms, l2, lookahead, &grad);
    const double g2 = grad.squaredNorm();

    Matrix next;
    double next_objective;
    for (;;) {
      next = lookahead + step * grad;
      next_objective = logit_objective(contexts, arms, l2, next, nullptr);
      if (next_objective >= reference + 1e-4 * step * g2 || step < 1e-16) break;
      step *= 0.5;
    }

    if (next_objective < objective) {
      // Momentum overshot: restart from the best point.
      lookahead = current;
      momentum = 1.0;
      continue;
    }

    const double momentum_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    lookahead = next + ((momentum - 1.0) / momentum_next) * (next - current);
    momentum = momentum_next;
    current = next;
    objective = next_objective;
    step *= 2.0;

    logit_objective(contexts, arms, l2, current, &trial_grad);
    fit.grad_norm = trial_grad.norm();
    fit.weights = current;
    fit.iterations = iter;
  }

  fit.converged = fit.grad_norm <= tol;
  return fit;
}

}  // namespace cbandit
