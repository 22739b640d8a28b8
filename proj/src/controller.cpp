#include "mpopi/controller.hpp"

#include <stdexcept>

namespace mpopi {

double trajectory_cost(double state_cost, const Eigen::VectorXd& u_prime,
                       const Eigen::VectorXd& u, const Eigen::VectorXd& noise,
                       const Eigen::MatrixXd& base_cov_inv, const CostParams& params) {
  const Eigen::Index n = u_prime.size();
  if (u.size() != n || noise.size() != n || base_cov_inv.rows() != n || base_cov_inv.cols() != n) {
    throw std::invalid_argument("trajectory_cost: dimension mismatch");
  }
  if (params.gamma() == 0.0) return state_cost;
  return state_cost + params.gamma() * u_prime.dot(base_cov_inv * (noise + (u_prime - u)));
}

Eigen::VectorXd control_update(const RolloutBatch& batch, const Eigen::VectorXd& u,
                               double lambda) {
  if (batch.samples() < 1) throw std::invalid_argument("control_update: empty batch");
  const Eigen::VectorXd w = softmax_weights(batch.costs, lambda);
  const Eigen::VectorXd offset = batch.sampled_mean - u;
  Eigen::VectorXd next = u;
  for (Eigen::Index k = 0; k < batch.samples(); ++k) next += w[k] * (batch.noise.col(k) + offset);
  return next;
}

Eigen::VectorXd control_update_centered(const RolloutBatch& batch, double lambda) {
  const Eigen::VectorXd w = softmax_weights(batch.costs, lambda);
  return batch.sampled_mean + batch.noise * w;
}

void validate(const ControllerConfig& config, const ControlPlan& plan, int action_dim) {
  if (config.samples < 1) throw std::invalid_argument("controller: K must be >= 1");
  if (config.ais_iterations < 1) throw std::invalid_argument("controller: L must be >= 1");
  if (config.horizon < 1) throw std::invalid_argument("controller: T must be >= 1");
  if (plan.horizon() != config.horizon) {
    throw std::invalid_argument("controller: plan horizon does not match T");
  }
  if (plan.dim() != action_dim) {
    throw std::invalid_argument("controller: plan has " + std::to_string(plan.dim()) +
                                " channels, environment expects " + std::to_string(action_dim));
  }
  if (config.base.dim() != plan.size()) {
    throw std::invalid_argument("controller: base covariance is not mT x mT");
  }
}

}  // namespace mpopi
