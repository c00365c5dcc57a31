#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace cbandit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Inconsistent dimensions between inputs (context vs. model, rows vs. labels, ...).
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A scalar parameter outside its legal range (lambda <= 0, gamma outside (0,1], ...).
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Operation called on an object in a state that cannot serve it
/// (empty snapshot store, history too small to fit a forest, ...).
struct StateError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Numerical breakdown that survived the jitter escalation.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Per-arm record of contexts, observed rewards and balancing weights.
/// Rows are aligned: contexts[i], rewards[i], weights[i] describe one observation.
struct ArmHistory {
  int arm_id = 0;
  int dim = 0;
  std::vector<Vector> contexts;
  std::vector<double> rewards;
  std::vector<double> weights;

  ArmHistory() = default;
  ArmHistory(int arm, int d) : arm_id(arm), dim(d) {}

  std::size_t size() const { return contexts.size(); }
  bool empty() const { return contexts.empty(); }

  void append(const Vector& x, double reward, double weight = 1.0) {
    if (x.size() != dim) {
      throw ShapeError("ArmHistory::append: context has dimension " +
                       std::to_string(x.size()) + ", expected " + std::to_string(dim));
    }
    contexts.push_back(x);
    rewards.push_back(reward);
    weights.push_back(weight);
  }

  /// Dense copies of the aligned columns, for solvers that want matrices.
  Matrix context_matrix() const {
    Matrix X(static_cast<Eigen::Index>(size()), dim);
    for (std::size_t i = 0; i < size(); ++i) X.row(static_cast<Eigen::Index>(i)) = contexts[i];
    return X;
  }
  Vector reward_vector() const {
    return Eigen::Map<const Vector>(rewards.data(), static_cast<Eigen::Index>(rewards.size()));
  }
  Vector weight_vector() const {
    return Eigen::Map<const Vector>(weights.data(), static_cast<Eigen::Index>(weights.size()));
  }

  void check_consistent() const {
    if (rewards.size() != contexts.size() || weights.size() != contexts.size()) {
      throw ShapeError("ArmHistory: contexts, rewards and weights must have equal length");
    }
    for (const auto& x : contexts) {
      if (x.size() != dim) throw ShapeError("ArmHistory: context dimension mismatch");
    }
  }
};

}  // namespace cbandit
