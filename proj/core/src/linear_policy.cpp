#include "cbandit/linear_policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cbandit/cross_validation.hpp"
#include "cbandit/linalg.hpp"
#include "cbandit/serde.hpp"

namespace cbandit {

namespace {
constexpr double kUnsetPropensity = std::numeric_limits<double>::quiet_NaN();
}

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::LinTS: return "lints";
    case PolicyKind::LinUCB: return "linucb";
    case PolicyKind::BLTS: return "blts";
    case PolicyKind::BLUCB: return "blucb";
  }
  return "unknown";
}

PolicyKind policy_kind_from_string(const std::string& name) {
  if (name == "lints") return PolicyKind::LinTS;
  if (name == "linucb") return PolicyKind::LinUCB;
  if (name == "blts") return PolicyKind::BLTS;
  if (name == "blucb") return PolicyKind::BLUCB;
  throw ParameterError("unknown linear policy kind: " + name);
}

void LinearPolicyConfig::validate() const {
  if (alpha < 0.0) throw ParameterError("LinearPolicyConfig: alpha must be >= 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw ParameterError("LinearPolicyConfig: gamma must lie in (0, 1]");
  }
  if (lambda_grid.empty()) throw ParameterError("LinearPolicyConfig: lambda_grid is empty");
  for (double l : lambda_grid) {
    if (l <= 0.0) throw ParameterError("LinearPolicyConfig: lambda_grid values must be positive");
  }
  if (refit_cadence < 1) throw ParameterError("LinearPolicyConfig: refit_cadence must be >= 1");
  if (mc_draws < 1) throw ParameterError("LinearPolicyConfig: mc_draws must be >= 1");
  if (logit_l2 < 0.0) throw ParameterError("LinearPolicyConfig: logit_l2 must be >= 0");
  if (cv_folds < 2) throw ParameterError("LinearPolicyConfig: cv_folds must be >= 2");
}

nlohmann::json LinearPolicyConfig::to_json() const {
  return {
      {"kind", to_string(kind)},
      {"alpha", alpha},
      {"gamma", gamma},
      {"lambda_grid", lambda_grid},
      {"refit_cadence", refit_cadence},
      {"mc_draws", mc_draws},
      {"logit_l2", logit_l2},
      {"logit_max_iter", logit_max_iter},
      {"logit_tol_per_obs", logit_tol_per_obs},
      {"cv_folds", cv_folds},
      {"snapshot_capacity", snapshot_capacity},
  };
}

LinearPolicyConfig LinearPolicyConfig::from_json(const nlohmann::json& j) {
  LinearPolicyConfig c;
  c.kind = policy_kind_from_string(j.at("kind").get<std::string>());
  c.alpha = j.at("alpha").get<double>();
  c.gamma = j.at("gamma").get<double>();
  c.lambda_grid = j.at("lambda_grid").get<std::vector<double>>();
  c.refit_cadence = j.at("refit_cadence").get<int>();
  c.mc_draws = j.at("mc_draws").get<int>();
  c.logit_l2 = j.at("logit_l2").get<double>();
  c.logit_max_iter = j.at("logit_max_iter").get<int>();
  c.logit_tol_per_obs = j.at("logit_tol_per_obs").get<double>();
  c.cv_folds = j.at("cv_folds").get<int>();
  c.snapshot_capacity = j.at("snapshot_capacity").get<int>();
  c.validate();
  return c;
}

LinearPolicy::LinearPolicy(LinearPolicyConfig config, int num_arms, int dim)
    : config_(std::move(config)),
      num_arms_(num_arms),
      dim_(dim),
      snapshots_(config_.snapshot_capacity) {
  config_.validate();
  if (num_arms_ < 1) throw ParameterError("LinearPolicy: need at least one arm");
  if (dim_ < 1) throw ParameterError("LinearPolicy: context dimension must be >= 1");
  arms_.reserve(static_cast<std::size_t>(num_arms_));
  for (int a = 0; a < num_arms_; ++a) {
    ArmState s;
    s.history = ArmHistory(a, dim_);
    arms_.push_back(std::move(s));
  }
}

bool LinearPolicy::any_model_null() const {
  for (const auto& a : arms_) {
    if (!a.model.has_value()) return true;
  }
  return false;
}

int LinearPolicy::argmax_tiebreak(const Vector& scores, Rng& rng) const {
  int pick = 0;
  double best = scores[0];
  int ties = 1;
  for (int a = 1; a < num_arms_; ++a) {
    if (scores[a] > best) {
      best = scores[a];
      pick = a;
      ties = 1;
    } else if (scores[a] == best) {
      ++ties;
      if (rng.uniform_int(ties) == 0) pick = a;
    }
  }
  return pick;
}

int LinearPolicy::select_arm(const Vector& x, Rng& rng) {
  if (x.size() != dim_) throw ShapeError("LinearPolicy::select_arm: context dimension mismatch");
  if (any_model_null()) return rng.uniform_int(num_arms_);

  Vector scores(num_arms_);
  if (is_thompson(config_.kind)) {
    for (int a = 0; a < num_arms_; ++a) {
      const auto& s = arms_[static_cast<std::size_t>(a)];
      const Vector theta_tilde =
          s.sampling_chol.size() == 0
              ? s.model->theta_hat
              : draw_multivariate_normal_chol(s.model->theta_hat, s.sampling_chol, rng);
      scores[a] = x.dot(theta_tilde);
    }
  } else {
    for (int a = 0; a < num_arms_; ++a) {
      const auto [mu, s2] = predict_mean_var(*arms_[static_cast<std::size_t>(a)].model, x);
      scores[a] = mu + config_.alpha * std::sqrt(s2);
    }
  }
  return argmax_tiebreak(scores, rng);
}

void LinearPolicy::refresh_weights_blts(ArmState& arm_state, Rng& rng) {
  const Eigen::Index n_snapshots = static_cast<Eigen::Index>(snapshots_.size());
  Matrix means(n_snapshots, num_arms_), sds(n_snapshots, num_arms_);

  for (std::size_t i = 0; i < arm_state.history.size(); ++i) {
    double p;
    if (arm_state.known_uniform[i]) {
      p = 1.0 / static_cast<double>(num_arms_);
    } else if (std::isnan(arm_state.propensities[i])) {
      if (snapshots_.empty()) {
        // No prior period to sample from yet: the assignment was effectively
        // the uniform initialization phase.
        p = 1.0 / static_cast<double>(num_arms_);
        arm_state.known_uniform[i] = 1;
      } else {
        const Vector& x = arm_state.history.contexts[i];
        for (Eigen::Index s = 0; s < n_snapshots; ++s) {
          const auto& models = snapshots_.items()[static_cast<std::size_t>(s)].second.models;
          for (int a = 0; a < num_arms_; ++a) {
            const auto [mu, s2] = predict_mean_var(models[static_cast<std::size_t>(a)], x);
            means(s, a) = mu;
            sds(s, a) = config_.alpha * std::sqrt(s2);
          }
        }
        const Vector freq = ts_propensity_mc_table(means, sds, config_.mc_draws, rng);
        p = freq[arm_state.history.arm_id];
      }
    } else {
      p = arm_state.propensities[i];
    }
    arm_state.propensities[i] = p;
    arm_state.history.weights[i] = clip_to_weight(p, config_.gamma);
  }
}

void LinearPolicy::refresh_weights_blucb() {
  // Assemble all observations across arms for the assignment classifier.
  std::size_t total = 0;
  for (const auto& a : arms_) total += a.history.size();
  if (total == 0) return;

  Matrix all_contexts(static_cast<Eigen::Index>(total), dim_);
  std::vector<int> assigned(total);
  std::size_t row = 0;
  for (const auto& a : arms_) {
    for (std::size_t i = 0; i < a.history.size(); ++i, ++row) {
      all_contexts.row(static_cast<Eigen::Index>(row)) = a.history.contexts[i];
      assigned[row] = a.history.arm_id;
    }
  }

  const double tol = config_.logit_tol_per_obs * std::max<std::size_t>(1, total);
  propensity_model_ =
      fit_multinomial_logit(all_contexts, assigned, num_arms_, config_.logit_l2,
                            config_.logit_max_iter, tol, &propensity_model_);

  for (auto& a : arms_) {
    for (std::size_t i = 0; i < a.history.size(); ++i) {
      const Vector probs = propensity_model_.predict_proba(a.history.contexts[i]);
      a.propensities[i] = probs[a.history.arm_id];
      a.history.weights[i] = clip_to_weight(a.propensities[i], config_.gamma);
    }
  }
}

void LinearPolicy::refit_arm(int arm, Rng& rng) {
  ArmState& s = arms_[static_cast<std::size_t>(arm)];
  const Matrix contexts = s.history.context_matrix();
  const Vector rewards = s.history.reward_vector();
  const Vector weights = s.history.weight_vector();

  const double lambda = cross_validate_lambda(
      contexts, rewards, weights, config_.lambda_grid, config_.cv_folds, rng,
      [this](const Matrix& xs, const Vector& rs, const Vector& ws, double l) {
        return fit_weighted_ridge(xs, rs, ws, l, dim_).theta_hat;
      });

  s.model = fit_weighted_ridge(contexts, rewards, weights, lambda, dim_);
  s.fitted_rows = s.history.size();
  if (is_thompson(config_.kind)) {
    const Matrix sampling_cov = config_.alpha * config_.alpha * s.model->covariance;
    s.sampling_chol =
        sampling_cov.isZero(0.0) ? Matrix() : spd_cholesky(sampling_cov);
  }
}

void LinearPolicy::maybe_snapshot(Rng& rng) {
  if (!is_thompson(config_.kind) || any_model_null()) return;
  ModelSnapshot snap;
  snap.snapshot_time = step_;
  snap.models.reserve(arms_.size());
  for (const auto& a : arms_) snap.models.push_back(*a.model);
  snapshots_.add(step_, std::move(snap), rng);
}

void LinearPolicy::update(const Vector& x, int arm, double reward, Rng& rng) {
  if (x.size() != dim_) throw ShapeError("LinearPolicy::update: context dimension mismatch");
  if (arm < 0 || arm >= num_arms_) throw ParameterError("LinearPolicy::update: arm out of range");

  const bool uniform_phase = any_model_null();
  ArmState& chosen = arms_[static_cast<std::size_t>(arm)];
  const double default_weight =
      is_balanced(config_.kind) && uniform_phase
          ? clip_to_weight(1.0 / static_cast<double>(num_arms_), config_.gamma)
          : 1.0;
  chosen.history.append(x, reward, default_weight);
  chosen.propensities.push_back(kUnsetPropensity);
  chosen.known_uniform.push_back(uniform_phase ? 1 : 0);
  ++step_;

  const bool first_fit = !chosen.model.has_value();
  const bool cadence_hit = step_ % config_.refit_cadence == 0;
  if (!first_fit && !cadence_hit) return;

  if (config_.kind == PolicyKind::BLUCB && config_.gamma < 1.0) {
    // The assignment model covers every observation, so all arms refit.
    refresh_weights_blucb();
    for (int a = 0; a < num_arms_; ++a) {
      if (!arms_[static_cast<std::size_t>(a)].history.empty()) refit_arm(a, rng);
    }
  } else {
    for (int a = 0; a < num_arms_; ++a) {
      ArmState& s = arms_[static_cast<std::size_t>(a)];
      const bool stale = s.history.size() > s.fitted_rows;
      const bool needs_first = !s.model.has_value() && !s.history.empty();
      if (!(needs_first || (cadence_hit && stale))) continue;
      if (config_.kind == PolicyKind::BLTS && config_.gamma < 1.0) {
        refresh_weights_blts(s, rng);
      }
      refit_arm(a, rng);
    }
  }
  maybe_snapshot(rng);
}

void LinearPolicy::seed_history(const std::vector<Vector>& contexts, const std::vector<int>& arms,
                                const std::vector<double>& rewards, Rng& rng) {
  if (contexts.size() != arms.size() || contexts.size() != rewards.size()) {
    throw ShapeError("LinearPolicy::seed_history: inputs must have equal length");
  }
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    if (arms[i] < 0 || arms[i] >= num_arms_) {
      throw ParameterError("LinearPolicy::seed_history: arm out of range");
    }
    ArmState& s = arms_[static_cast<std::size_t>(arms[i])];
    const double w = is_balanced(config_.kind)
                         ? clip_to_weight(1.0 / static_cast<double>(num_arms_), config_.gamma)
                         : 1.0;
    s.history.append(contexts[i], rewards[i], w);
    s.propensities.push_back(1.0 / static_cast<double>(num_arms_));
    s.known_uniform.push_back(1);
    ++step_;
  }
  if (config_.kind == PolicyKind::BLUCB && config_.gamma < 1.0) refresh_weights_blucb();
  for (int a = 0; a < num_arms_; ++a) {
    if (!arms_[static_cast<std::size_t>(a)].history.empty()) refit_arm(a, rng);
  }
  maybe_snapshot(rng);
}

std::optional<std::pair<double, double>> LinearPolicy::predict(int arm, const Vector& x) const {
  const auto& s = arms_.at(static_cast<std::size_t>(arm));
  if (!s.model.has_value()) return std::nullopt;
  return predict_mean_var(*s.model, x);
}

const std::optional<FittedArmModel>& LinearPolicy::model(int arm) const {
  return arms_.at(static_cast<std::size_t>(arm)).model;
}

const ArmHistory& LinearPolicy::arm_history(int arm) const {
  return arms_.at(static_cast<std::size_t>(arm)).history;
}

namespace {

nlohmann::json model_to_json(const FittedArmModel& m) {
  return {
      {"theta_hat", vector_to_json(m.theta_hat)},
      {"precision", matrix_to_json(m.precision)},
      {"covariance", matrix_to_json(m.covariance)},
      {"regularization", m.regularization},
      {"residual_scale", m.residual_scale},
  };
}

FittedArmModel model_from_json(const nlohmann::json& j) {
  FittedArmModel m;
  m.theta_hat = vector_from_json(j.at("theta_hat"));
  m.precision = matrix_from_json(j.at("precision"));
  m.covariance = matrix_from_json(j.at("covariance"));
  m.regularization = j.at("regularization").get<double>();
  m.residual_scale = j.at("residual_scale").get<double>();
  return m;
}

}  // namespace

nlohmann::json LinearPolicy::to_json() const {
  nlohmann::json arms = nlohmann::json::array();
  for (const auto& s : arms_) {
    nlohmann::json contexts = nlohmann::json::array();
    for (const auto& x : s.history.contexts) contexts.push_back(vector_to_json(x));
    nlohmann::json propensities = nlohmann::json::array();
    for (double p : s.propensities) {
      if (std::isnan(p)) {
        propensities.push_back(nullptr);
      } else {
        propensities.push_back(p);
      }
    }
    arms.push_back({
        {"arm_id", s.history.arm_id},
        {"contexts", std::move(contexts)},
        {"rewards", s.history.rewards},
        {"weights", s.history.weights},
        {"propensities", std::move(propensities)},
        {"known_uniform", std::vector<int>(s.known_uniform.begin(), s.known_uniform.end())},
        {"fitted_rows", s.fitted_rows},
        {"model", s.model.has_value() ? model_to_json(*s.model) : nlohmann::json(nullptr)},
    });
  }

  nlohmann::json snaps = nlohmann::json::array();
  for (const auto& [time, snap] : snapshots_.items()) {
    nlohmann::json models = nlohmann::json::array();
    for (const auto& m : snap.models) models.push_back(model_to_json(m));
    snaps.push_back({{"time", time}, {"models", std::move(models)}});
  }

  return {
      {"schema", "cbandit.policy_state.v1"},
      {"config", config_.to_json()},
      {"num_arms", num_arms_},
      {"dim", dim_},
      {"step", step_},
      {"arms", std::move(arms)},
      {"snapshots", std::move(snaps)},
      {"snapshots_seen", snapshots_.seen()},
      {"propensity_model",
       propensity_model_.weights.size() == 0
           ? nlohmann::json(nullptr)
           : nlohmann::json{{"weights", matrix_to_json(propensity_model_.weights)},
                            {"converged", propensity_model_.converged}}},
  };
}

LinearPolicy LinearPolicy::from_json(const nlohmann::json& j) {
  if (j.at("schema").get<std::string>() != "cbandit.policy_state.v1") {
    throw ParameterError("LinearPolicy::from_json: unsupported schema " +
                         j.at("schema").get<std::string>());
  }
  LinearPolicy policy(LinearPolicyConfig::from_json(j.at("config")), j.at("num_arms").get<int>(),
                      j.at("dim").get<int>());
  policy.step_ = j.at("step").get<long>();

  const auto& arms = j.at("arms");
  for (std::size_t a = 0; a < arms.size(); ++a) {
    ArmState& s = policy.arms_[a];
    for (const auto& xj : arms[a].at("contexts")) s.history.contexts.push_back(vector_from_json(xj));
    s.history.rewards = arms[a].at("rewards").get<std::vector<double>>();
    s.history.weights = arms[a].at("weights").get<std::vector<double>>();
    for (const auto& pj : arms[a].at("propensities")) {
      s.propensities.push_back(pj.is_null() ? kUnsetPropensity : pj.get<double>());
    }
    for (int f : arms[a].at("known_uniform").get<std::vector<int>>()) {
      s.known_uniform.push_back(static_cast<char>(f));
    }
    s.fitted_rows = arms[a].at("fitted_rows").get<std::size_t>();
    if (!arms[a].at("model").is_null()) {
      s.model = model_from_json(arms[a].at("model"));
      if (is_thompson(policy.config_.kind)) {
        const Matrix sampling_cov =
            policy.config_.alpha * policy.config_.alpha * s.model->covariance;
        s.sampling_chol = sampling_cov.isZero(0.0) ? Matrix() : spd_cholesky(sampling_cov);
      }
    }
    s.history.check_consistent();
  }

  // Reservoir bookkeeping: restore the retained set and the seen counter.
  Rng dummy(0);
  for (const auto& sj : j.at("snapshots")) {
    ModelSnapshot snap;
    snap.snapshot_time = sj.at("time").get<long>();
    for (const auto& mj : sj.at("models")) snap.models.push_back(model_from_json(mj));
    policy.snapshots_.add(snap.snapshot_time, std::move(snap), dummy);
  }
  policy.snapshots_.set_seen(j.at("snapshots_seen").get<long>());

  if (!j.at("propensity_model").is_null()) {
    policy.propensity_model_.weights = matrix_from_json(j.at("propensity_model").at("weights"));
    policy.propensity_model_.converged = j.at("propensity_model").at("converged").get<bool>();
  }
  return policy;
}

}  // namespace cbandit
