#include "cbandit/cross_validation.hpp"

#include <algorithm>
#include <numeric>

namespace cbandit {

double cross_validate_lambda(const Matrix& contexts, const Vector& rewards,
                             const Vector& weights, const std::vector<double>& grid,
                             int folds, Rng& rng, const PenalizedFit& fit) {
  if (grid.empty()) throw ParameterError("cross_validate_lambda: empty grid");
  for (double g : grid) {
    if (g <= 0.0) throw ParameterError("cross_validate_lambda: grid values must be positive");
  }
  std::vector<double> sorted_grid = grid;
  std::sort(sorted_grid.begin(), sorted_grid.end());
  if (sorted_grid.size() == 1) return sorted_grid.front();

  const Eigen::Index n = contexts.rows();
  if (n < 10) return sorted_grid[(sorted_grid.size() - 1) / 2];

  folds = std::min<int>(folds, static_cast<int>(n));

  // Shuffled round-robin fold assignment.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const int j = rng.uniform_int(static_cast<int>(i) + 1);
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }

  std::vector<double> error(sorted_grid.size(), 0.0);
  const Eigen::Index d = contexts.cols();
  for (int f = 0; f < folds; ++f) {
    std::vector<Eigen::Index> train, validate;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      (static_cast<int>(pos % static_cast<std::size_t>(folds)) == f ? validate : train)
          .push_back(order[pos]);
    }
    if (train.empty() || validate.empty()) continue;

    Matrix xt(static_cast<Eigen::Index>(train.size()), d);
    Vector rt(static_cast<Eigen::Index>(train.size())), wt(static_cast<Eigen::Index>(train.size()));
    for (std::size_t i = 0; i < train.size(); ++i) {
      xt.row(static_cast<Eigen::Index>(i)) = contexts.row(train[i]);
      rt[static_cast<Eigen::Index>(i)] = rewards[train[i]];
      wt[static_cast<Eigen::Index>(i)] = weights[train[i]];
    }
    for (std::size_t g = 0; g < sorted_grid.size(); ++g) {
      const Vector coef = fit(xt, rt, wt, sorted_grid[g]);
      for (Eigen::Index v : validate) {
        const double resid = rewards[v] - contexts.row(v).dot(coef);
        error[g] += weights[v] * resid * resid;
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t g = 1; g < sorted_grid.size(); ++g) {
    if (error[g] < error[best]) best = g;
  }
  return sorted_grid[best];
}

}  // namespace cbandit
