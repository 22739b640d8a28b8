#include "mpopi/env/mountain_car.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mpopi {

MountainCarStep mountaincar_step(const MountainCarState& state, double action,
                                 const MountainCarParams& p) {
  const double a = std::clamp(action, -p.max_action, p.max_action);
  double v = state.v + p.power * a - p.gravity * std::cos(3.0 * state.x);
  v = std::clamp(v, -p.max_speed, p.max_speed);
  double x = state.x + v;
  if (x <= p.min_position) {
    x = p.min_position;
    v = std::max(v, 0.0);
  }
  x = std::min(x, p.max_position);

  MountainCarStep out;
  out.state = {x, v};
  out.done = x >= p.goal_position && v > 0.0;
  out.reward = -1.0 + std::abs(v) + (out.done ? p.goal_bonus : 0.0);
  return out;
}

double mountaincar_valley() { return -std::numbers::pi / 6.0; }

}  // namespace mpopi
