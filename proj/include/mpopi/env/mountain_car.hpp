#pragma once

#include "mpopi/environment.hpp"

#include <span>
#include <vector>

namespace mpopi {

/// Continuous-action MountainCar:
///   v' = clamp(v + power * a - gravity * cos(3x), -max_speed, max_speed)
///   x' = clamp(x + v', min_position, max_position),  v' = 0 at the left wall.
struct MountainCarParams {
  double min_position = -1.2;
  double max_position = 0.6;
  double max_speed = 0.07;
  double goal_position = 0.6;
  double power = 0.001;
  double gravity = 0.0025;
  double max_action = 1.0;
  double goal_bonus = 100000.0;
  int max_steps = 200;
};

struct MountainCarState {
  double x = -0.5;
  double v = 0.0;
};

struct MountainCarStep {
  MountainCarState state;
  double reward = 0.0;
  bool done = false;  // reached the goal with v > 0
};

/// One step with reward -1 + |v| + bonus * [goal reached with v > 0].
/// The action is clamped to [-max_action, max_action]. The 200-step
/// episode cap is enforced by the episode driver, not here.
MountainCarStep mountaincar_step(const MountainCarState& state, double action,
                                 const MountainCarParams& params = {});

/// Position of the valley floor, where cos(3x) = 0.
double mountaincar_valley();

class MountainCarEnv {
 public:
  using State = MountainCarState;

  explicit MountainCarEnv(MountainCarParams params = {}) : params_(params) {}

  std::vector<Bounds> action_bounds() const { return {{-params_.max_action, params_.max_action}}; }
  Transition<State> step(const State& s, std::span<const double> action) const {
    auto r = mountaincar_step(s, action[0], params_);
    return {r.state, r.reward, r.done};
  }
  double terminal_cost(const State&) const { return 0.0; }
  bool stop_rollout_on_terminal() const { return true; }

  const MountainCarParams& params() const { return params_; }

 private:
  MountainCarParams params_;
};

}  // namespace mpopi
