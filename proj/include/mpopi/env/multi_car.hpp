#pragma once

#include "mpopi/env/race_car.hpp"

#include <array>
#include <span>
#include <vector>

namespace mpopi {

inline constexpr int kMaxCars = 8;

struct MultiCarRules {
  double proximity_distance = 4.0;   // m; any pair this close triggers the penalty
  double proximity_penalty = 11000.0;
  double start_spacing = 8.0;        // m of arclength between consecutive cars at the start
};

/// N_c cars driven as one plant; car i uses actions [2i, 2i+1].
struct MultiCarState {
  std::array<RaceCarState, kMaxCars> cars{};
  int count = 0;

  std::span<const RaceCarState> active() const {
    return {cars.data(), static_cast<std::size_t>(count)};
  }
};

/// sum_i R_i - 11000 [any pair within 4 m] - sum_{i<j} |p_i - p_j|, with
/// |p_i - p_j| the Euclidean center-to-center distance.
double multicar_reward(std::span<const RaceCarState> cars, std::span<const double> car_rewards,
                       const MultiCarRules& rules);

/// Steps every car for one control step and combines the rewards. `done`
/// once every car has completed its laps, or any car exceeded a violation
/// time limit. Errors from a car are rethrown naming the car index.
StepOutcome multicar_step(MultiCarState& state, std::span<const double> actions, const Track& track,
                          const CarParams& params, const RaceRules& rules,
                          const MultiCarRules& multi);

/// Car i starts i * start_spacing metres of arclength behind s = 0.
MultiCarState start_multicar(const Track& track, int cars, double speed,
                             const MultiCarRules& multi);

class MultiCarEnv {
 public:
  using State = MultiCarState;

  MultiCarEnv(const Track& track, int cars, CarParams params = {}, RaceRules rules = {},
              MultiCarRules multi = {});

  int cars() const { return cars_; }
  std::vector<Bounds> action_bounds() const;
  Transition<State> step(const State& s, std::span<const double> action) const {
    Transition<State> t{s, 0.0, false};
    const StepOutcome o = multicar_step(t.state, action, *track_, params_, rules_, multi_);
    t.reward = o.reward;
    t.terminal = o.done;
    return t;
  }
  double terminal_cost(const State&) const { return 0.0; }
  bool stop_rollout_on_terminal() const { return false; }

  const Track& track() const { return *track_; }
  const RaceRules& rules() const { return rules_; }
  const MultiCarRules& multi_rules() const { return multi_; }

 private:
  const Track* track_;
  int cars_;
  CarParams params_;
  RaceRules rules_;
  MultiCarRules multi_;
};

}  // namespace mpopi
