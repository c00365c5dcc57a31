#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "cbandit/policy.hpp"
#include "cbandit/types.hpp"

namespace cbandit {

enum class GlmSolver { Ridge, Lasso };

/// Approximate posterior over an arm's coefficient vector: one regularized
/// fit per bootstrap resample of the arm's history.
struct BootstrapEnsemble {
  GlmSolver solver = GlmSolver::Ridge;
  double lambda = 1.0;
  std::vector<Vector> coefficient_samples;
  bool degenerate = false;  ///< some resample failed the redraw budget

  /// Ensemble mean and (B-1)-normalized variance of the prediction x.theta.
  std::pair<double, double> predict_mean_var(const Vector& x) const;
};

/// Draws b_boot resamples with replacement of the history rows (weights ride
/// along with their rows) and fits one model per resample. A degenerate
/// resample (non-finite solution) is redrawn at most 10 times, then recorded
/// as a zero sample with the ensemble flagged.
BootstrapEnsemble bootstrap_posterior(const ArmHistory& history, GlmSolver solver, double lambda,
                                      int b_boot, Rng& rng);

struct BootstrapTsConfig {
  GlmSolver solver = GlmSolver::Lasso;
  int b_boot = 100;
  /// Ridge: absolute penalties. Lasso: fractions of ||X^T W r||_inf (the
  /// smallest penalty with an all-zero solution), so the grid tracks the
  /// unnormalized objective as the history grows.
  std::vector<double> lambda_grid;
  bool lambda_grid_relative = true;
  int refit_cadence = 10;
  int cv_folds = 5;
  double alpha = 1.0;  ///< moments mode only
  /// member: score each arm with one uniformly drawn ensemble member (raw
  /// bootstrap posterior; alpha unused). moments: draw from
  /// N(mean, alpha^2 * var) of the ensemble predictions.
  enum class DrawMode { Member, Moments } draw = DrawMode::Member;

  void validate() const;
  static std::vector<double> default_grid(GlmSolver solver, bool relative);
};

/// Thompson sampling over bootstrap-approximated posteriors for ridge or
/// lasso outcome models. Until every arm has been pulled once, contexts are
/// assigned uniformly at random.
class BootstrapTsPolicy final : public Policy {
 public:
  BootstrapTsPolicy(BootstrapTsConfig config, int num_arms, int dim);

  int select_arm(const Vector& x, Rng& rng) override;
  void update(const Vector& x, int arm, double reward, Rng& rng) override;
  void seed_history(const std::vector<Vector>& contexts, const std::vector<int>& arms,
                    const std::vector<double>& rewards, Rng& rng) override;
  std::optional<std::pair<double, double>> predict(int arm, const Vector& x) const override;

  int num_arms() const override { return num_arms_; }
  int dim() const override { return dim_; }
  const std::optional<BootstrapEnsemble>& ensemble(int arm) const;
  const ArmHistory& arm_history(int arm) const;

 private:
  void refit_arm(int arm, Rng& rng);

  BootstrapTsConfig config_;
  int num_arms_;
  int dim_;
  long step_ = 0;
  std::vector<ArmHistory> histories_;
  std::vector<std::optional<BootstrapEnsemble>> ensembles_;
  std::vector<std::size_t> fitted_rows_;
};

}  // namespace cbandit
