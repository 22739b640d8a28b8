#pragma once

#include "mpopi/environment.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <exception>
#include <vector>

namespace mpopi {

template <class State>
struct RolloutResult {
  std::vector<State> trajectory;  // x_0 ... x_T (shorter if terminated early)
  double state_cost = 0.0;        // c(X) + phi(X)
};

namespace detail {

template <Environment Env>
double propagate(const Env& env, typename Env::State state, const Eigen::VectorXd& mean,
                 const auto& noise, InputShaper& shaper,
                 std::vector<typename Env::State>* trajectory) {
  const auto bounds = env.action_bounds();
  const Eigen::Index m = static_cast<Eigen::Index>(bounds.size());
  const Eigen::Index T = mean.size() / m;
  std::vector<double> shaped(static_cast<std::size_t>(m));
  Eigen::VectorXd raw(m);
  shaper.reset();
  double cost = 0.0;
  if (trajectory) trajectory->push_back(state);
  for (Eigen::Index t = 0; t < T; ++t) {
    raw = mean.segment(t * m, m) + noise.segment(t * m, m);
    shaper.apply(raw, std::span<double>(shaped));
    Transition<typename Env::State> tr;
    try {
      tr = env.step(state, std::span<const double>(shaped));
    } catch (const DynamicsError& e) {
      throw RolloutError(e.what(), static_cast<int>(t));
    }
    if (!std::isfinite(tr.reward)) {
      throw RolloutError("non-finite reward", static_cast<int>(t));
    }
    cost -= tr.reward;
    state = std::move(tr.state);
    if (trajectory) trajectory->push_back(state);
    if (tr.terminal && env.stop_rollout_on_terminal()) break;
  }
  return cost + env.terminal_cost(state);
}

}  // namespace detail

/// Propagates T steps from `state` applying g to u'_t + eps_t before the
/// dynamics, and returns the trajectory with c(X) + phi(X). Stage cost is the
/// negated environment reward.
template <Environment Env>
RolloutResult<typename Env::State> rollout(const Env& env, const typename Env::State& state,
                                           const Eigen::VectorXd& plan_mean,
                                           const Eigen::VectorXd& noise,
                                           const InputShaper& shaper) {
  if (plan_mean.size() != noise.size() ||
      plan_mean.size() % static_cast<Eigen::Index>(env.action_bounds().size()) != 0) {
    throw std::invalid_argument("rollout: plan and noise must both have length m*T");
  }
  RolloutResult<typename Env::State> out;
  InputShaper g = shaper;
  out.state_cost = detail::propagate(env, state, plan_mean, noise, g, &out.trajectory);
  return out;
}

/// Reference kernel: state cost of every noise column, one after another.
template <Environment Env>
Eigen::VectorXd rollout_costs_serial(const Env& env, const typename Env::State& state,
                                     const Eigen::VectorXd& plan_mean,
                                     const Eigen::MatrixXd& noise, const InputShaper& shaper) {
  Eigen::VectorXd costs(noise.cols());
  InputShaper g = shaper;
  for (Eigen::Index k = 0; k < noise.cols(); ++k) {
    costs[k] = detail::propagate(env, state, plan_mean, noise.col(k), g, nullptr);
  }
  return costs;
}

/// OpenMP kernel. Each column writes only its own slot and uses its own copy
/// of the environment state, so the result is bit-identical to the serial
/// kernel for any thread count. The first failure (lowest column index) is
/// rethrown after the parallel region.
template <Environment Env>
Eigen::VectorXd rollout_costs_parallel(const Env& env, const typename Env::State& state,
                                       const Eigen::VectorXd& plan_mean,
                                       const Eigen::MatrixXd& noise, const InputShaper& shaper,
                                       int threads) {
  const Eigen::Index K = noise.cols();
  Eigen::VectorXd costs(K);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(K));
#pragma omp parallel num_threads(threads)
  {
    InputShaper g = shaper;
#pragma omp for schedule(static)
    for (Eigen::Index k = 0; k < K; ++k) {
      try {
        costs[k] = detail::propagate(env, state, plan_mean, noise.col(k), g, nullptr);
      } catch (...) {
        errors[static_cast<std::size_t>(k)] = std::current_exception();
      }
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return costs;
}

}  // namespace mpopi
