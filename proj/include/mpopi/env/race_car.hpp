#pragma once

#include "mpopi/env/track.hpp"
#include "mpopi/environment.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace mpopi {

/// Full-scale rear-drive sedan. None of these are measured values; they are
/// sized so the car can exceed 39 m/s on a straight and hold large sideslip.
struct CarParams {
  double mass = 1950.0;          // kg
  double yaw_inertia = 2900.0;   // kg m^2
  double front_axle = 1.53;      // CG to front axle, m
  double rear_axle = 1.23;       // CG to rear axle, m
  double cornering_front = 2.0e5;  // N/rad
  double cornering_rear = 2.5e5;   // N/rad
  double friction = 1.0;
  double drive_force = 7000.0;   // N at full throttle, rear axle
  double brake_force = 17000.0;  // N at full brake, both axles
  double brake_front_share = 0.6;
  double drag = 3.0;             // N / (m/s)^2
  double rolling = 0.015;        // fraction of weight
  double steer_max = 0.4;        // rad
  double steer_time_constant = 0.05;  // s, first-order steering actuator
  double gravity = 9.81;
};

struct CarState {
  Eigen::Vector2d pos = Eigen::Vector2d::Zero();  // m, world frame
  double yaw = 0.0;       // rad
  double vx = 0.0;        // body-frame longitudinal, m/s
  double vy = 0.0;        // body-frame lateral, m/s
  double yaw_rate = 0.0;  // rad/s
  double steer = 0.0;     // road-wheel angle, rad

  double speed() const { return std::hypot(vx, vy); }
  /// Sideslip angle atan2(vy, vx).
  double sideslip() const { return std::atan2(vy, vx); }
};

/// Fiala brush-tire lateral force for slip angle `alpha`, cornering stiffness
/// `stiffness`, and available friction force `max_force`. Force opposes slip
/// and saturates at max_force beyond the sliding angle atan(3 Fmax / C).
double fiala_lateral_force(double alpha, double stiffness, double max_force);

/// Time derivative of the single-track model under fixed commands.
struct CarDerivative {
  double x, y, yaw, vx, vy, yaw_rate, steer;
};
CarDerivative car_derivative(const CarState& s, double steer_cmd, double throttle_cmd,
                             const CarParams& p);

/// Heun (RK2) over `substeps` steps of `dt`. Commands are clamped to
/// |steer| <= steer_max and throttle in [-1, 1]. Throws DynamicsError
/// carrying the substep index on a non-finite state.
CarState integrate_car(const CarState& s, double steer_cmd, double throttle_cmd,
                       const CarParams& p, double dt = 0.01, int substeps = 10);

/// Reward weights and episode termination limits for racing.
struct RaceRules {
  double speed_weight = 2.0;
  double beta_limit = 45.0 * std::numbers::pi / 180.0;
  double beta_penalty = 5000.0;
  double track_penalty = 1000000.0;
  double beta_time_limit = 5.0;      // s over the beta limit before the trial ends
  double offtrack_time_limit = 1.0;  // s outside the boundary before the trial ends
  int target_laps = 2;
  double control_dt = 0.1;
  int substeps = 10;
};

/// Lap and violation bookkeeping carried alongside the car.
struct RaceProgress {
  double distance = 0.0;  // unwrapped arclength travelled since the start, m
  double last_s = 0.0;    // arclength of the previous projection
  std::size_t segment = 0;
  int laps = 0;
  double beta_time = 0.0;      // consecutive seconds over the beta limit
  double offtrack_time = 0.0;  // consecutive seconds outside the boundary
  bool beta_violation = false;   // ever over the beta limit
  bool track_violation = false;  // ever outside the boundary
};

struct RaceCarState {
  CarState car;
  RaceProgress race;
};

struct StepOutcome {
  double reward = 0.0;
  bool violated_beta = false;
  bool off_track = false;
  bool done = false;
  double progress = 0.0;  // unwrapped arclength, m
};

/// Per-car reward 2|v| - |d| - 5000 [|beta| > limit] - 1e6 [outside track].
double car_reward(const CarState& car, const TrackProjection& proj, const RaceRules& rules);

/// Advances one control step (substeps of the dynamics), re-projects onto
/// the track, updates laps and violation timers, and scores the new state.
StepOutcome car_step(RaceCarState& state, double steer_cmd, double throttle_cmd,
                     const Track& track, const CarParams& params, const RaceRules& rules);

/// Car at arclength s on the centerline, aligned with the track, moving at `speed`.
RaceCarState start_on_track(const Track& track, double s, double speed);

class RaceCarEnv {
 public:
  using State = RaceCarState;

  RaceCarEnv(const Track& track, CarParams params = {}, RaceRules rules = {})
      : track_(&track), params_(params), rules_(rules) {}

  std::vector<Bounds> action_bounds() const {
    return {{-params_.steer_max, params_.steer_max}, {-1.0, 1.0}};
  }
  Transition<State> step(const State& s, std::span<const double> action) const {
    Transition<State> t{s, 0.0, false};
    const StepOutcome o = car_step(t.state, action[0], action[1], *track_, params_, rules_);
    t.reward = o.reward;
    t.terminal = o.done;
    return t;
  }
  double terminal_cost(const State&) const { return 0.0; }
  bool stop_rollout_on_terminal() const { return false; }

  const Track& track() const { return *track_; }
  const CarParams& params() const { return params_; }
  const RaceRules& rules() const { return rules_; }

 private:
  const Track* track_;
  CarParams params_;
  RaceRules rules_;
};

}  // namespace mpopi
