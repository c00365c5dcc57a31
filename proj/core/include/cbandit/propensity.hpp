#pragma once

#include <span>
#include <utility>
#include <vector>

#include "cbandit/ridge.hpp"
#include "cbandit/rng.hpp"
#include "cbandit/types.hpp"

namespace cbandit {

/// Balancing weight 1 / max(gamma, p), clipped into [1, 1/gamma].
/// gamma = 1 is legal and forces the weight to 1 (balancing disabled).
double clip_to_weight(double p, double gamma);

/// Per-observation assignment probabilities, one row per observation and one
/// column per arm, plus the clipping threshold used to derive weights.
struct PropensityTable {
  Matrix probabilities;  // n x K
  double gamma = 0.1;

  void validate() const;
  double weight_for(Eigen::Index observation, int arm) const;
};

/// The per-arm models a policy considered at the end of one past period.
struct ModelSnapshot {
  long snapshot_time = 0;
  std::vector<FittedArmModel> models;
};

/// Append-only store of past snapshots with an optional capacity bound.
/// When bounded, uniform reservoir sampling keeps each retained snapshot
/// marginally uniform over all past refit times, so drawing uniformly from
/// the store still means "a randomly selected prior time period".
template <typename Snapshot>
class SnapshotStore {
 public:
  explicit SnapshotStore(int capacity = 0) : capacity_(capacity) {}

  void add(long snapshot_time, Snapshot snapshot, Rng& rng) {
    if (!items_.empty() && snapshot_time <= items_.back().first) {
      throw StateError("SnapshotStore: snapshot_time must be strictly increasing");
    }
    ++seen_;
    if (capacity_ <= 0 || static_cast<int>(items_.size()) < capacity_) {
      items_.emplace_back(snapshot_time, std::move(snapshot));
      return;
    }
    // Reservoir step: keep the newcomer with probability capacity/seen.
    if (rng.uniform01() * static_cast<double>(seen_) < static_cast<double>(capacity_)) {
      const int victim = rng.uniform_int(static_cast<int>(items_.size()));
      items_.erase(items_.begin() + victim);
      items_.emplace_back(snapshot_time, std::move(snapshot));
    }
  }

  bool empty() const { return items_.empty(); }
  std::size_t size() const { return items_.size(); }
  const std::vector<std::pair<long, Snapshot>>& items() const { return items_; }
  int capacity() const { return capacity_; }
  long seen() const { return seen_; }
  void set_seen(long seen) { seen_ = seen; }  ///< checkpoint restore only
  void clear() { items_.clear(); seen_ = 0; }

 private:
  int capacity_;
  long seen_ = 0;
  std::vector<std::pair<long, Snapshot>> items_;
};

/// Monte-Carlo Thompson-sampling propensities from a table of per-snapshot,
/// per-arm predictive means and standard deviations (S x K each): every
/// iteration picks a snapshot row uniformly, draws one Gaussian per arm and
/// records the argmax. Returned frequencies are counts / n_draws.
Vector ts_propensity_mc_table(const Matrix& means, const Matrix& sds, int n_draws, Rng& rng);

/// Same over linear-model snapshots: arm a at snapshot s contributes
/// N(x.theta_a, alpha^2 x^T Cov_a x).
Vector ts_propensity_mc(std::span<const ModelSnapshot> snapshots, const Vector& x,
                        double alpha, int n_draws, Rng& rng);

/// Multinomial (softmax-linear) classifier with one weight vector per arm;
/// identifiability comes from the symmetric softmax plus L2, not a pivot class.
struct MultinomialLogit {
  Matrix weights;  // K x d
  bool converged = false;
  int iterations = 0;
  double grad_norm = 0.0;

  Vector predict_proba(const Vector& x) const;
  int num_arms() const { return static_cast<int>(weights.rows()); }
};

/// L2-regularized maximum likelihood via Nesterov-accelerated gradient ascent
/// with backtracking. Non-convergence after max_iter is not an error: the best
/// iterate comes back with converged = false. The convergence flag certifies
/// that the gradient norm of the regularized log-likelihood is <= tol.
MultinomialLogit fit_multinomial_logit(const Matrix& contexts, const std::vector<int>& arms,
                                       int num_arms, double l2, int max_iter = 2000,
                                       double tol = 1e-8,
                                       const MultinomialLogit* warm_start = nullptr);

}  // namespace cbandit
