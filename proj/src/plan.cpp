#include "mpopi/plan.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mpopi {

ControlPlan::ControlPlan(int horizon, std::vector<Bounds> bounds)
    : ControlPlan(horizon, bounds,
                  Eigen::VectorXd::Zero(static_cast<Eigen::Index>(horizon) *
                                        static_cast<Eigen::Index>(bounds.size()))) {}

ControlPlan::ControlPlan(int horizon, std::vector<Bounds> bounds, Eigen::VectorXd data)
    : horizon_(horizon), bounds_(std::move(bounds)) {
  if (horizon_ < 1) throw std::invalid_argument("ControlPlan: horizon must be >= 1");
  if (bounds_.empty()) throw std::invalid_argument("ControlPlan: need at least one channel");
  for (const auto& b : bounds_) {
    if (!(b.lo <= b.hi)) throw std::invalid_argument("ControlPlan: bound lo > hi");
  }
  set_data(std::move(data));
}

void ControlPlan::set_data(Eigen::VectorXd data) {
  if (data.size() != static_cast<Eigen::Index>(horizon_) * dim()) {
    throw std::invalid_argument("ControlPlan: data length " + std::to_string(data.size()) +
                                " != m*T = " + std::to_string(horizon_ * dim()));
  }
  data_ = std::move(data);
}

void ControlPlan::clamp_to_bounds() {
  const int m = dim();
  for (Eigen::Index i = 0; i < data_.size(); ++i) {
    const Bounds& b = bounds_[static_cast<std::size_t>(i % m)];
    data_[i] = std::clamp(data_[i], b.lo, b.hi);
  }
}

ControlPlan receding_shift(const ControlPlan& plan, TailInit tail,
                           const Eigen::VectorXd& constant) {
  const int m = plan.dim();
  const int T = plan.horizon();
  Eigen::VectorXd last = plan.step(T - 1);
  Eigen::VectorXd shifted(plan.size());
  if (T > 1) shifted.head((T - 1) * m) = plan.data().tail((T - 1) * m);

  switch (tail) {
    case TailInit::RepeatLast:
      shifted.tail(m) = last;
      break;
    case TailInit::Zero:
      shifted.tail(m).setZero();
      break;
    case TailInit::Constant:
      if (constant.size() != m) {
        throw std::invalid_argument("receding_shift: tail constant must have m entries");
      }
      shifted.tail(m) = constant;
      break;
  }
  return ControlPlan(T, plan.bounds(), std::move(shifted));
}

CostParams::CostParams(double lambda, double alpha)
    : lambda_(lambda), alpha_(alpha), gamma_(lambda * (1.0 - alpha)) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("CostParams: lambda must be positive and finite");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("CostParams: alpha must lie in [0, 1]");
  }
}

}  // namespace mpopi
