#include "mpopi/env/race_car.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mpopi {

namespace {

bool finite(const CarState& s) {
  return s.pos.allFinite() && std::isfinite(s.yaw) && std::isfinite(s.vx) &&
         std::isfinite(s.vy) && std::isfinite(s.yaw_rate) && std::isfinite(s.steer);
}

constexpr double kMinSlipSpeed = 1.0;  // m/s floor in slip-angle denominators
constexpr double kTimerTol = 1e-9;

}  // namespace

namespace {

// Same force written in tan(alpha), which is what the slip kinematics give
// directly. `beyond_right_angle` marks |alpha| >= pi/2, where tan wraps.
double fiala_from_tan(double t, bool beyond_right_angle, double stiffness, double max_force) {
  if (!(max_force > 0.0)) return 0.0;
  if (beyond_right_angle || std::abs(t) >= 3.0 * max_force / stiffness) {
    return t > 0.0 ? -max_force : max_force;
  }
  const double c = stiffness;
  return -c * t + c * c / (3.0 * max_force) * std::abs(t) * t -
         c * c * c / (27.0 * max_force * max_force) * t * t * t;
}

}  // namespace

double fiala_lateral_force(double alpha, double stiffness, double max_force) {
  const bool wrapped = std::abs(alpha) >= 0.5 * std::numbers::pi;
  // past a right angle only the sign matters
  const double t = wrapped ? std::copysign(1.0, alpha) : std::tan(alpha);
  return fiala_from_tan(t, wrapped, stiffness, max_force);
}

CarDerivative car_derivative(const CarState& s, double steer_cmd, double throttle_cmd,
                             const CarParams& p) {
  const double a = p.front_axle;
  const double b = p.rear_axle;
  const double wheelbase = a + b;
  const double weight = p.mass * p.gravity;
  const double fz_front = weight * b / wheelbase;
  const double fz_rear = weight * a / wheelbase;
  const double grip_front = p.friction * fz_front;
  const double grip_rear = p.friction * fz_rear;

  const double throttle = std::clamp(throttle_cmd, -1.0, 1.0);
  const double fade = std::tanh(s.vx / 0.5);
  double fx_front = 0.0;
  double fx_rear = 0.0;
  if (throttle >= 0.0) {
    fx_rear = throttle * p.drive_force;
  } else {
    // tanh fades braking out near standstill so the car never reverses.
    const double brake = -throttle * p.brake_force * fade;
    fx_front = -p.brake_front_share * brake;
    fx_rear = -(1.0 - p.brake_front_share) * brake;
  }
  fx_front = std::clamp(fx_front, -0.99 * grip_front, 0.99 * grip_front);
  fx_rear = std::clamp(fx_rear, -0.99 * grip_rear, 0.99 * grip_rear);

  // Friction ellipse: longitudinal force derates the lateral capacity.
  const double fy_max_front =
      fx_front == 0.0 ? grip_front : std::sqrt(grip_front * grip_front - fx_front * fx_front);
  const double fy_max_rear =
      fx_rear == 0.0 ? grip_rear : std::sqrt(grip_rear * grip_rear - fx_rear * fx_rear);

  const double delta = s.steer;
  const double vx_slip = std::max(s.vx, kMinSlipSpeed);
  const double cd = std::cos(delta);
  const double sd = std::sin(delta);
  // tan(atan(x) - delta) = (x - tan delta) / (1 + x tan delta); a non-positive
  // denominator means the front slip angle is past a right angle, on the side of x
  const double x_front = (s.vy + a * s.yaw_rate) / vx_slip;
  const double td = sd / cd;
  const double den = 1.0 + x_front * td;
  const bool front_wrapped = den <= 0.0;
  const double tan_front = front_wrapped ? x_front : (x_front - td) / den;
  const double tan_rear = (s.vy - b * s.yaw_rate) / vx_slip;
  const double fy_front = fiala_from_tan(tan_front, front_wrapped, p.cornering_front, fy_max_front);
  const double fy_rear = fiala_from_tan(tan_rear, false, p.cornering_rear, fy_max_rear);

  const double resist = p.drag * s.vx * std::abs(s.vx) + p.rolling * weight * fade;
  const double cy = std::cos(s.yaw);
  const double sy = std::sin(s.yaw);

  const double steer_target = std::clamp(steer_cmd, -p.steer_max, p.steer_max);

  CarDerivative d{};
  d.x = s.vx * cy - s.vy * sy;
  d.y = s.vx * sy + s.vy * cy;
  d.yaw = s.yaw_rate;
  d.vx = (fx_rear + fx_front * cd - fy_front * sd - resist) / p.mass + s.yaw_rate * s.vy;
  d.vy = (fy_front * cd + fx_front * sd + fy_rear) / p.mass - s.yaw_rate * s.vx;
  d.yaw_rate = (a * (fy_front * cd + fx_front * sd) - b * fy_rear) / p.yaw_inertia;
  d.steer = (steer_target - s.steer) / p.steer_time_constant;
  return d;
}

CarState integrate_car(const CarState& start, double steer_cmd, double throttle_cmd,
                       const CarParams& p, double dt, int substeps) {
  CarState s = start;
  const double target = std::clamp(steer_cmd, -p.steer_max, p.steer_max);
  const double steer_decay = std::exp(-dt / p.steer_time_constant);
  for (int i = 0; i < substeps; ++i) {
    // Heun: the lateral tire modes are too stiff at speed for plain Euler
    const CarDerivative k1 = car_derivative(s, steer_cmd, throttle_cmd, p);
    CarState e = s;
    e.pos.x() += dt * k1.x;
    e.pos.y() += dt * k1.y;
    e.yaw += dt * k1.yaw;
    e.vx += dt * k1.vx;
    e.vy += dt * k1.vy;
    e.yaw_rate += dt * k1.yaw_rate;
    // the actuator is linear, so its update is exact
    e.steer = target + (s.steer - target) * steer_decay;
    if (!finite(e)) throw DynamicsError("non-finite car state", i);
    const CarDerivative k2 = car_derivative(e, steer_cmd, throttle_cmd, p);
    const double h = 0.5 * dt;
    s.pos.x() += h * (k1.x + k2.x);
    s.pos.y() += h * (k1.y + k2.y);
    s.yaw += h * (k1.yaw + k2.yaw);
    s.vx += h * (k1.vx + k2.vx);
    s.vy += h * (k1.vy + k2.vy);
    s.yaw_rate += h * (k1.yaw_rate + k2.yaw_rate);
    s.steer = e.steer;
    if (!finite(s)) throw DynamicsError("non-finite car state", i);
  }
  return s;
}

double car_reward(const CarState& car, const TrackProjection& proj, const RaceRules& rules) {
  double r = rules.speed_weight * car.speed() - std::abs(proj.lateral);
  if (std::abs(car.sideslip()) > rules.beta_limit) r -= rules.beta_penalty;
  if (!proj.inside) r -= rules.track_penalty;
  return r;
}

StepOutcome car_step(RaceCarState& state, double steer_cmd, double throttle_cmd,
                     const Track& track, const CarParams& params, const RaceRules& rules) {
  const double dt = rules.control_dt / rules.substeps;
  state.car = integrate_car(state.car, steer_cmd, throttle_cmd, params, dt, rules.substeps);

  RaceProgress& race = state.race;
  const TrackProjection proj = track.project_near(state.car.pos, race.segment);
  double ds = proj.arclength - race.last_s;
  if (track.closed()) {
    if (ds > 0.5 * track.length()) ds -= track.length();
    if (ds < -0.5 * track.length()) ds += track.length();
  }
  race.distance += ds;
  race.last_s = proj.arclength;
  race.segment = proj.segment;
  race.laps = std::max(race.laps, static_cast<int>(std::floor(race.distance / track.length())));

  StepOutcome out;
  out.violated_beta = std::abs(state.car.sideslip()) > rules.beta_limit;
  out.off_track = !proj.inside;
  race.beta_time = out.violated_beta ? race.beta_time + rules.control_dt : 0.0;
  race.offtrack_time = out.off_track ? race.offtrack_time + rules.control_dt : 0.0;
  race.beta_violation = race.beta_violation || out.violated_beta;
  race.track_violation = race.track_violation || out.off_track;

  out.reward = car_reward(state.car, proj, rules);
  out.progress = race.distance;
  out.done = race.laps >= rules.target_laps ||
             race.beta_time > rules.beta_time_limit + kTimerTol ||
             race.offtrack_time > rules.offtrack_time_limit + kTimerTol;
  return out;
}

RaceCarState start_on_track(const Track& track, double s, double speed) {
  RaceCarState st;
  st.car.pos = track.point_at(s);
  const Eigen::Vector2d t = track.tangent_at(s);
  st.car.yaw = std::atan2(t.y(), t.x());
  st.car.vx = speed;
  const TrackProjection proj = track.project(st.car.pos);
  st.race.last_s = proj.arclength;
  st.race.segment = proj.segment;
  return st;
}

}  // namespace mpopi
