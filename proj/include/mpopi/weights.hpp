#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace mpopi {

class NonFiniteCostError : public std::runtime_error {
 public:
  explicit NonFiniteCostError(Eigen::Index index);
  Eigen::Index index() const { return index_; }

 private:
  Eigen::Index index_;
};

/// Importance weights w_k = exp(-(s_k - rho)/lambda) / eta with
/// rho = min_k s_k. Throws NonFiniteCostError for the first non-finite cost.
Eigen::VectorXd softmax_weights(const Eigen::VectorXd& costs, double lambda);

/// 1 / sum w_k^2
double effective_sample_size(const Eigen::VectorXd& weights);

}  // namespace mpopi
