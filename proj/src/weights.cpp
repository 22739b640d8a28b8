#include "mpopi/weights.hpp"

#include <cmath>
#include <string>

namespace mpopi {

NonFiniteCostError::NonFiniteCostError(Eigen::Index index)
    : std::runtime_error("non-finite trajectory cost at sample " + std::to_string(index)),
      index_(index) {}

Eigen::VectorXd softmax_weights(const Eigen::VectorXd& costs, double lambda) {
  if (costs.size() < 1) throw std::invalid_argument("softmax_weights: empty cost vector");
  if (!(lambda > 0.0)) throw std::invalid_argument("softmax_weights: lambda must be > 0");
  for (Eigen::Index k = 0; k < costs.size(); ++k) {
    if (!std::isfinite(costs[k])) throw NonFiniteCostError(k);
  }
  const double rho = costs.minCoeff();
  Eigen::VectorXd w = (-(costs.array() - rho) / lambda).exp().matrix();
  return w / w.sum();
}

double effective_sample_size(const Eigen::VectorXd& weights) {
  return 1.0 / weights.squaredNorm();
}

}  // namespace mpopi
