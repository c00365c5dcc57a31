#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "cbandit/rng.hpp"
#include "cbandit/types.hpp"

namespace cbandit {

/// Shared contextual-bandit policy interface: select an arm for a context,
/// then update on the observed reward. A policy instance is a single-threaded
/// state machine; run distinct instances concurrently, each with its own Rng.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual int select_arm(const Vector& x, Rng& rng) = 0;
  virtual void update(const Vector& x, int arm, double reward, Rng& rng) = 0;

  /// Pre-seeded history (e.g. a warm-start batch assigned uniformly at
  /// random). Implementations refit after ingesting it.
  virtual void seed_history(const std::vector<Vector>& contexts, const std::vector<int>& arms,
                            const std::vector<double>& rewards, Rng& rng) = 0;

  /// Current (mean, variance) estimate for an arm, when the policy has one.
  virtual std::optional<std::pair<double, double>> predict(int arm, const Vector& x) const {
    (void)arm;
    (void)x;
    return std::nullopt;
  }

  virtual int num_arms() const = 0;
  virtual int dim() const = 0;
};

}  // namespace cbandit
