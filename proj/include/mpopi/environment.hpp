#pragma once

#include "mpopi/plan.hpp"

#include <algorithm>
#include <concepts>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mpopi {

template <class State>
struct Transition {
  State state;
  double reward = 0.0;
  bool terminal = false;
};

/// Raised by an environment whose integration produced a non-finite state.
class DynamicsError : public std::runtime_error {
 public:
  DynamicsError(const std::string& what, int substep)
      : std::runtime_error(what + " (substep " + std::to_string(substep) + ")"),
        substep_(substep) {}
  int substep() const { return substep_; }

 private:
  int substep_;
};

/// A rollout failed at control step `step` of the horizon.
class RolloutError : public std::runtime_error {
 public:
  RolloutError(const std::string& what, int step)
      : std::runtime_error("rollout failed at step " + std::to_string(step) + ": " + what),
        step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// A plant with dynamics F, rewards, and a terminal cost phi. States are
/// plain values; step() never mutates its input.
template <class E>
concept Environment = std::copy_constructible<typename E::State> &&
    requires(const E& env, const typename E::State& s, std::span<const double> action) {
      { env.action_bounds() } -> std::convertible_to<std::vector<Bounds>>;
      { env.step(s, action) } -> std::same_as<Transition<typename E::State>>;
      { env.terminal_cost(s) } -> std::convertible_to<double>;
      { env.stop_rollout_on_terminal() } -> std::convertible_to<bool>;
    };

/// Input shaping g: optional first-order low-pass (y = a*y_prev + (1-a)*x)
/// followed by a per-channel clamp. The filter state is seeded with the first
/// input after reset(), so the first output is the clamped raw input.
class InputShaper {
 public:
  InputShaper(std::vector<Bounds> bounds, double smoothing = 0.0)
      : bounds_(std::move(bounds)), smoothing_(smoothing), filtered_(bounds_.size(), 0.0) {
    if (!(smoothing >= 0.0 && smoothing < 1.0)) {
      throw std::invalid_argument("InputShaper: smoothing must lie in [0, 1)");
    }
  }

  void reset() { primed_ = false; }

  template <class In>
  void apply(const In& raw, std::span<double> out) {
    for (std::size_t i = 0; i < bounds_.size(); ++i) {
      double x = raw[static_cast<Eigen::Index>(i)];
      if (smoothing_ > 0.0) {
        x = primed_ ? smoothing_ * filtered_[i] + (1.0 - smoothing_) * x : x;
        filtered_[i] = x;
      }
      out[i] = std::clamp(x, bounds_[i].lo, bounds_[i].hi);
    }
    primed_ = true;
  }

  const std::vector<Bounds>& bounds() const { return bounds_; }
  double smoothing() const { return smoothing_; }

 private:
  std::vector<Bounds> bounds_;
  double smoothing_;
  std::vector<double> filtered_;
  bool primed_ = false;
};

}  // namespace mpopi
