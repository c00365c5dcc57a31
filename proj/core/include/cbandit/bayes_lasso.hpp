#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "cbandit/policy.hpp"
#include "cbandit/types.hpp"

namespace cbandit {

/// Inverse-Gaussian draw via the chi-square transformation with a uniform
/// acceptance step. mu and lam are the usual IG(mu, lambda) parameters.
double sample_inverse_gaussian(double mu, double lam, Rng& rng);

/// The precision matrix of the theta-conditional is written A = X^T X + D_tau
/// in the source algorithm; the Bayesian-LASSO literature it draws on uses
/// D_tau^{-1}. Both forms are available; AsWritten is the default.
enum class GibbsPrecisionForm { AsWritten, Inverse };

struct GibbsState {
  Vector theta;
  Vector tau_sq;
  double sigma_sq = 1.0;
  double lambda = 1.0;
  bool overflow_flagged = false;  ///< a conditional mean parameter hit the 1e8 clamp

  void validate() const;
};

/// Mean and covariance of theta | tau^2, sigma^2 for given Gram statistics:
/// N(A^{-1} X^T r, sigma^2 A^{-1}).
std::pair<Vector, Matrix> bayesian_lasso_theta_conditional(const Matrix& xtx, const Vector& xtr,
                                                           const Vector& tau_sq, double sigma_sq,
                                                           GibbsPrecisionForm form);

/// One Gibbs sweep: tau_j^2 ~ InverseGaussian(sqrt(lambda^2 sigma^2 / theta_j^2),
/// lambda^2) for every j (|theta_j| floored at 1e-8, the IG mean clamped at
/// 1e8 with the state flagged), then theta from its Gaussian conditional.
GibbsState bayesian_lasso_gibbs_step(const GibbsState& state, const Matrix& contexts,
                                     const Vector& rewards, Rng& rng,
                                     GibbsPrecisionForm form = GibbsPrecisionForm::AsWritten);

/// Same sweep from precomputed Gram statistics (X^T X, X^T r).
GibbsState bayesian_lasso_gibbs_step_gram(const GibbsState& state, const Matrix& xtx,
                                          const Vector& xtr, Rng& rng,
                                          GibbsPrecisionForm form = GibbsPrecisionForm::AsWritten);

struct BayesianLassoTsConfig {
  double lambda = 1.0;
  double sigma_sq = 0.0;  ///< 0 = auto: residual variance of a ridge pre-fit per arm
  int gibbs_iters = 20;   ///< in-loop chain length per update
  GibbsPrecisionForm precision_form = GibbsPrecisionForm::AsWritten;

  void validate() const;
};

/// Thompson sampling via per-arm Bayesian LASSO Gibbs chains. Every context
/// is scored greedily on each arm's current chain draw; only the chosen arm's
/// chain advances (gibbs_iters sweeps warm-started from its last draw, one
/// retained draw kept uniformly at random).
class BayesianLassoTsPolicy final : public Policy {
 public:
  BayesianLassoTsPolicy(BayesianLassoTsConfig config, int num_arms, int dim, Rng& rng);

  int select_arm(const Vector& x, Rng& rng) override;
  void update(const Vector& x, int arm, double reward, Rng& rng) override;
  void seed_history(const std::vector<Vector>& contexts, const std::vector<int>& arms,
                    const std::vector<double>& rewards, Rng& rng) override;
  std::optional<std::pair<double, double>> predict(int arm, const Vector& x) const override;

  int num_arms() const override { return num_arms_; }
  int dim() const override { return dim_; }
  const GibbsState& chain(int arm) const { return chains_.at(static_cast<std::size_t>(arm)); }

 private:
  struct ArmData {
    Matrix xtx;       // incremental Gram
    Vector xtr;
    double rtr = 0.0;
    long n = 0;
  };

  void refresh_sigma(int arm);
  void advance_chain(int arm, Rng& rng);

  BayesianLassoTsConfig config_;
  int num_arms_;
  int dim_;
  std::vector<ArmData> data_;
  std::vector<GibbsState> chains_;
};

}  // namespace cbandit
