#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "cbandit/policy.hpp"
#include "cbandit/propensity.hpp"
#include "cbandit/ridge.hpp"

namespace cbandit {

enum class PolicyKind { LinTS, LinUCB, BLTS, BLUCB };

std::string to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(const std::string& name);

inline bool is_thompson(PolicyKind k) { return k == PolicyKind::LinTS || k == PolicyKind::BLTS; }
inline bool is_balanced(PolicyKind k) { return k == PolicyKind::BLTS || k == PolicyKind::BLUCB; }

struct LinearPolicyConfig {
  PolicyKind kind = PolicyKind::LinTS;
  double alpha = 1.0;                       ///< exploration multiplier, >= 0
  double gamma = 0.1;                       ///< clipping threshold in (0, 1]; 1 disables balancing
  std::vector<double> lambda_grid = {0.05, 0.5, 5.0};
  int refit_cadence = 10;                   ///< steps between refits
  int mc_draws = 1000;                      ///< BLTS propensity Monte-Carlo iterations
  double logit_l2 = 1.0;                    ///< BLUCB propensity model regularization
  int logit_max_iter = 500;
  double logit_tol_per_obs = 1e-6;          ///< absolute tolerance = this * max(1, n)
  int cv_folds = 5;
  int snapshot_capacity = 0;                ///< 0 = unbounded

  void validate() const;
  nlohmann::json to_json() const;
  static LinearPolicyConfig from_json(const nlohmann::json& j);
};

/// The four linear policies behind one interface. BLTS weighs each arm's
/// observations by clipped inverse Monte-Carlo propensities (its own
/// randomization probabilities); BLUCB estimates propensities with a
/// multinomial logistic model of the assignment on the contexts. LinTS and
/// LinUCB are the unit-weight special cases.
///
/// Propensities are cached at the refit that first weighted the observation
/// rather than recomputed for the whole history at every refit; observations
/// assigned during the uniform phase (any arm still unfitted, or a pre-seeded
/// batch) have exactly known propensity 1/K.
class LinearPolicy final : public Policy {
 public:
  LinearPolicy(LinearPolicyConfig config, int num_arms, int dim);

  int select_arm(const Vector& x, Rng& rng) override;
  void update(const Vector& x, int arm, double reward, Rng& rng) override;
  void seed_history(const std::vector<Vector>& contexts, const std::vector<int>& arms,
                    const std::vector<double>& rewards, Rng& rng) override;
  std::optional<std::pair<double, double>> predict(int arm, const Vector& x) const override;

  int num_arms() const override { return num_arms_; }
  int dim() const override { return dim_; }
  long step_count() const { return step_; }
  const LinearPolicyConfig& config() const { return config_; }

  const std::optional<FittedArmModel>& model(int arm) const;
  const ArmHistory& arm_history(int arm) const;
  const SnapshotStore<ModelSnapshot>& snapshots() const { return snapshots_; }

  /// Versioned JSON document with the full mutable state (histories, models,
  /// cached propensities, snapshots) for checkpoint/resume.
  nlohmann::json to_json() const;
  static LinearPolicy from_json(const nlohmann::json& j);

 private:
  struct ArmState {
    ArmHistory history;
    std::vector<double> propensities;  ///< cached p_a(x_i); NaN until computed
    std::vector<char> known_uniform;   ///< 1 when assignment probability was exactly 1/K
    std::optional<FittedArmModel> model;
    Matrix sampling_chol;              ///< chol(alpha^2 * covariance), cached per refit
    std::size_t fitted_rows = 0;       ///< history rows the current model includes
  };

  bool any_model_null() const;
  void refit_arm(int arm, Rng& rng);
  void refresh_weights_blts(ArmState& arm_state, Rng& rng);
  void refresh_weights_blucb();
  void maybe_snapshot(Rng& rng);
  int argmax_tiebreak(const Vector& scores, Rng& rng) const;

  LinearPolicyConfig config_;
  int num_arms_;
  int dim_;
  long step_ = 0;
  std::vector<ArmState> arms_;
  SnapshotStore<ModelSnapshot> snapshots_;
  MultinomialLogit propensity_model_;  ///< BLUCB only; warm-started across refits
};

}  // namespace cbandit
