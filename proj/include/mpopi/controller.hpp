#pragma once

#include "mpopi/ais.hpp"
#include "mpopi/environment.hpp"
#include "mpopi/gaussian.hpp"
#include "mpopi/plan.hpp"
#include "mpopi/rng.hpp"
#include "mpopi/rollout.hpp"
#include "mpopi/weights.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mpopi {

struct ControllerConfig {
  int samples = 20;         // K
  int ais_iterations = 1;   // L
  int horizon = 50;         // T
  CostParams cost{1.0, 0.0};
  AisParams ais;
  /// Base covariance Sigma, mT x mT. Also the initial proposal covariance
  /// at every control step.
  JointProposal base;
  TailInit tail_init = TailInit::RepeatLast;
  Eigen::VectorXd tail_constant;
  double input_smoothing = 0.0;
  int threads = 1;  // rollout threads; 1 selects the serial kernel
};

struct IterationDiagnostics {
  double min_cost = 0.0;
  double mean_cost = 0.0;
  double ess = 0.0;  // 1 / sum w^2 under the controller lambda
};

struct StepResult {
  Eigen::VectorXd command;    // u_0 of the updated plan, before the shift
  ControlPlan updated_plan;   // after the receding shift
  std::vector<IterationDiagnostics> iterations;
  int ais_fallbacks = 0;      // AIS updates rejected; the previous proposal was kept
  std::string last_ais_error;
};

/// s = state_cost + gamma * U'^T Sigma^{-1} (eps + U' - U).
double trajectory_cost(double state_cost, const Eigen::VectorXd& u_prime,
                       const Eigen::VectorXd& u, const Eigen::VectorXd& noise,
                       const Eigen::MatrixXd& base_cov_inv, const CostParams& params);

/// U + sum_k w_k (eps_k + U' - U), with w the lambda-softmax of batch.costs.
Eigen::VectorXd control_update(const RolloutBatch& batch, const Eigen::VectorXd& u,
                               double lambda);
/// Same update written as U' + sum_k w_k eps_k.
Eigen::VectorXd control_update_centered(const RolloutBatch& batch, double lambda);

/// Checks config against an environment and a plan; throws std::invalid_argument.
void validate(const ControllerConfig& config, const ControlPlan& plan, int action_dim);

namespace detail {

inline IterationDiagnostics diagnose(const Eigen::VectorXd& costs, double lambda) {
  return {costs.minCoeff(), costs.mean(), effective_sample_size(softmax_weights(costs, lambda))};
}

template <Environment Env>
Eigen::VectorXd state_costs(const Env& env, const typename Env::State& state,
                            const Eigen::VectorXd& mean, const Eigen::MatrixXd& noise,
                            const InputShaper& shaper, int threads) {
  if (threads > 1) return rollout_costs_parallel(env, state, mean, noise, shaper, threads);
  return rollout_costs_serial(env, state, mean, noise, shaper);
}

inline Eigen::MatrixXd draw_noise(const JointProposal& p, int samples, std::uint64_t seed,
                                  int threads) {
  if (threads > 1) return p.sample_noise_parallel(samples, seed, threads);
  return p.sample_noise(samples, seed);
}

inline std::uint64_t noise_seed(std::uint64_t step_seed, int iteration) {
  return derive_seed(step_seed, {kNoiseStream, static_cast<std::uint64_t>(iteration)});
}

inline std::uint64_t ais_seed(std::uint64_t step_seed, int iteration) {
  return derive_seed(step_seed, {kAisStream, static_cast<std::uint64_t>(iteration)});
}

inline ControlPlan finish_step(ControlPlan plan, const ControllerConfig& config,
                               StepResult& result) {
  plan.clamp_to_bounds();
  result.command = plan.step(0);
  return receding_shift(plan, config.tail_init, config.tail_constant);
}

}  // namespace detail

/// One control step of the optimized path-integral controller: L rounds of
/// sample / roll out / score, with an AIS update of (U', Sigma') between
/// rounds, then the lambda-weighted update of U from the last batch, the
/// command u_0, and the receding shift. (U', Sigma') restart from (U, Sigma)
/// at every call. `step_seed` addresses all randomness in the step.
template <Environment Env>
StepResult mpopi_step(const Env& env, const typename Env::State& state, const ControlPlan& plan,
                      const ControllerConfig& config, const AisStrategy* strategy,
                      std::uint64_t step_seed) {
  validate(config, plan, static_cast<int>(env.action_bounds().size()));
  if (config.ais_iterations > 1 && strategy == nullptr) {
    throw std::invalid_argument("mpopi_step: L > 1 requires an AIS strategy");
  }
  const Eigen::VectorXd& u = plan.data();
  const double gamma = config.cost.gamma();
  const InputShaper shaper(env.action_bounds(), config.input_smoothing);

  StepResult result{Eigen::VectorXd(), plan, {}, 0, {}};
  JointProposal proposal = config.base.with_mean(u);
  RolloutBatch batch;

  for (int iter = 1; iter <= config.ais_iterations; ++iter) {
    const Eigen::VectorXd& u_prime = proposal.mean();
    batch.sampled_mean = u_prime;
    batch.noise = detail::draw_noise(proposal, config.samples,
                                     detail::noise_seed(step_seed, iter), config.threads);
    batch.costs = detail::state_costs(env, state, u_prime, batch.noise, shaper, config.threads);
    if (gamma != 0.0) {
      // Sigma^{-1} of the base covariance, as written, even though the noise
      // came from Sigma'.
      const Eigen::VectorXd weighted = config.base.solve(u_prime);
      const Eigen::VectorXd offset = u_prime - u;
      for (Eigen::Index k = 0; k < batch.noise.cols(); ++k) {
        batch.costs[k] += gamma * weighted.dot(batch.noise.col(k) + offset);
      }
    }
    result.iterations.push_back(detail::diagnose(batch.costs, config.cost.lambda()));

    if (iter < config.ais_iterations) {
      const AisContext ctx{proposal, batch, iter, config.ais};
      try {
        proposal = strategy->update(ctx, detail::ais_seed(step_seed, iter));
      } catch (const std::exception& e) {
        ++result.ais_fallbacks;
        result.last_ais_error = e.what();
      }
    }
  }

  ControlPlan updated = plan;
  updated.set_data(control_update(batch, u, config.cost.lambda()));
  result.updated_plan = detail::finish_step(std::move(updated), config, result);
  return result;
}

/// Classic MPPI step with per-step sampling around U. Kept as an
/// independent reference: mpopi_step with L = 1 must reproduce it.
template <Environment Env>
StepResult mppi_step(const Env& env, const typename Env::State& state, const ControlPlan& plan,
                     const ControllerConfig& config, std::uint64_t step_seed) {
  validate(config, plan, static_cast<int>(env.action_bounds().size()));
  const Eigen::VectorXd& u = plan.data();
  const InputShaper shaper(env.action_bounds(), config.input_smoothing);
  const JointProposal proposal = config.base.with_mean(u);

  Eigen::MatrixXd noise = detail::draw_noise(proposal, config.samples,
                                             detail::noise_seed(step_seed, 1), config.threads);
  Eigen::VectorXd costs = detail::state_costs(env, state, u, noise, shaper, config.threads);
  const double gamma = config.cost.gamma();
  if (gamma != 0.0) {
    const Eigen::VectorXd weighted = config.base.solve(u);
    for (Eigen::Index k = 0; k < noise.cols(); ++k) costs[k] += gamma * weighted.dot(noise.col(k));
  }

  StepResult result{Eigen::VectorXd(), plan, {}, 0, {}};
  result.iterations.push_back(detail::diagnose(costs, config.cost.lambda()));

  const Eigen::VectorXd w = softmax_weights(costs, config.cost.lambda());
  Eigen::VectorXd next = u;
  for (Eigen::Index k = 0; k < noise.cols(); ++k) next += w[k] * noise.col(k);

  ControlPlan updated = plan;
  updated.set_data(std::move(next));
  result.updated_plan = detail::finish_step(std::move(updated), config, result);
  return result;
}

}  // namespace mpopi
