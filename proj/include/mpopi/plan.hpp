#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace mpopi {

/// Inclusive actuator range for one control channel.
struct Bounds {
  double lo;
  double hi;
};

/// Rolling commanded sequence U = [u_0, ..., u_{T-1}], stored flat with the
/// m channels of each step contiguous.
class ControlPlan {
 public:
  ControlPlan(int horizon, std::vector<Bounds> bounds);
  ControlPlan(int horizon, std::vector<Bounds> bounds, Eigen::VectorXd data);

  int horizon() const { return horizon_; }
  int dim() const { return static_cast<int>(bounds_.size()); }
  Eigen::Index size() const { return data_.size(); }

  const Eigen::VectorXd& data() const { return data_; }
  void set_data(Eigen::VectorXd data);

  auto step(int t) const { return data_.segment(static_cast<Eigen::Index>(t) * dim(), dim()); }
  auto step(int t) { return data_.segment(static_cast<Eigen::Index>(t) * dim(), dim()); }

  const std::vector<Bounds>& bounds() const { return bounds_; }

  /// Clamps every element to its channel's bounds.
  void clamp_to_bounds();

 private:
  int horizon_;
  std::vector<Bounds> bounds_;
  Eigen::VectorXd data_;
};

enum class TailInit { RepeatLast, Zero, Constant };

/// Shifts the plan forward one control step ("u_{t-1} <- u_t") and fills the
/// freed final step. `constant` is only read for TailInit::Constant and must
/// have one entry per channel.
ControlPlan receding_shift(const ControlPlan& plan, TailInit tail,
                           const Eigen::VectorXd& constant = {});

/// Inverse temperature and control-cost decoupling. gamma = lambda (1 - alpha).
class CostParams {
 public:
  CostParams(double lambda, double alpha);

  double lambda() const { return lambda_; }
  double alpha() const { return alpha_; }
  double gamma() const { return gamma_; }

 private:
  double lambda_;
  double alpha_;
  double gamma_;
};

/// K sampled noise vectors (one per column), their scored costs, and the
/// proposal mean U' they were drawn around.
struct RolloutBatch {
  Eigen::MatrixXd noise;
  Eigen::VectorXd costs;
  Eigen::VectorXd sampled_mean;

  Eigen::Index samples() const { return noise.cols(); }
  /// v_k = U' + eps_k
  Eigen::VectorXd sample(Eigen::Index k) const { return sampled_mean + noise.col(k); }
};

}  // namespace mpopi
