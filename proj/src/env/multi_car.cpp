#include "mpopi/env/multi_car.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace mpopi {

double multicar_reward(std::span<const RaceCarState> cars, std::span<const double> car_rewards,
                       const MultiCarRules& rules) {
  double total = 0.0;
  for (double r : car_rewards) total += r;
  bool close = false;
  for (std::size_t i = 0; i + 1 < cars.size(); ++i) {
    for (std::size_t j = i + 1; j < cars.size(); ++j) {
      const double d = (cars[i].car.pos - cars[j].car.pos).norm();
      close = close || d <= rules.proximity_distance;
      total -= d;
    }
  }
  return close ? total - rules.proximity_penalty : total;
}

StepOutcome multicar_step(MultiCarState& state, std::span<const double> actions, const Track& track,
                          const CarParams& params, const RaceRules& rules,
                          const MultiCarRules& multi) {
  if (state.count < 2) throw std::invalid_argument("multicar_step: need at least 2 cars");
  if (actions.size() != static_cast<std::size_t>(2 * state.count)) {
    throw std::invalid_argument("multicar_step: expected " + std::to_string(2 * state.count) +
                                " actions, got " + std::to_string(actions.size()));
  }
  std::array<double, kMaxCars> rewards{};
  StepOutcome out;
  out.done = true;
  out.progress = std::numeric_limits<double>::infinity();
  bool timed_out = false;
  for (int i = 0; i < state.count; ++i) {
    StepOutcome o;
    try {
      o = car_step(state.cars[static_cast<std::size_t>(i)], actions[2 * i], actions[2 * i + 1],
                   track, params, rules);
    } catch (const DynamicsError& e) {
      throw DynamicsError("car " + std::to_string(i) + ": " + e.what(), e.substep());
    }
    const RaceProgress& race = state.cars[static_cast<std::size_t>(i)].race;
    rewards[static_cast<std::size_t>(i)] = o.reward;
    out.violated_beta = out.violated_beta || o.violated_beta;
    out.off_track = out.off_track || o.off_track;
    out.done = out.done && race.laps >= rules.target_laps;
    timed_out = timed_out || race.beta_time > rules.beta_time_limit + 1e-9 ||
                race.offtrack_time > rules.offtrack_time_limit + 1e-9;
    out.progress = std::min(out.progress, o.progress);
  }
  out.done = out.done || timed_out;
  out.reward = multicar_reward(state.active(),
                               std::span<const double>(rewards.data(),
                                                       static_cast<std::size_t>(state.count)),
                               multi);
  return out;
}

MultiCarState start_multicar(const Track& track, int cars, double speed,
                             const MultiCarRules& multi) {
  if (cars < 2 || cars > kMaxCars) {
    throw std::invalid_argument("start_multicar: car count must be in [2, " +
                                std::to_string(kMaxCars) + "]");
  }
  MultiCarState st;
  st.count = cars;
  for (int i = 0; i < cars; ++i) {
    st.cars[static_cast<std::size_t>(i)] = start_on_track(track, -multi.start_spacing * i, speed);
  }
  return st;
}

MultiCarEnv::MultiCarEnv(const Track& track, int cars, CarParams params, RaceRules rules,
                         MultiCarRules multi)
    : track_(&track), cars_(cars), params_(params), rules_(rules), multi_(multi) {
  if (cars < 2 || cars > kMaxCars) {
    throw std::invalid_argument("MultiCarEnv: car count must be in [2, " +
                                std::to_string(kMaxCars) + "]");
  }
}

std::vector<Bounds> MultiCarEnv::action_bounds() const {
  std::vector<Bounds> b;
  for (int i = 0; i < cars_; ++i) {
    b.push_back({-params_.steer_max, params_.steer_max});
    b.push_back({-1.0, 1.0});
  }
  return b;
}

}  // namespace mpopi
