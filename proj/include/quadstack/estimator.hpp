#pragma once

#include <optional>

#include "quadstack/model.hpp"
#include "quadstack/types.hpp"

namespace quadstack {

// State source for the pilot. Implementations consume whatever inputs they
// understand and produce the freshest estimate on demand.
class Estimator {
 public:
  virtual ~Estimator() = default;

  virtual void add_state(const QuadState&) {}
  virtual void add_imu(const ImuSample&) {}
  virtual void add_pose(double /*t*/, const Vec3& /*p*/, const Quat& /*q*/) {}

  // Estimate valid at query time, or nullopt when nothing usable arrived yet.
  virtual std::optional<QuadState> estimate(double now) = 0;

  // Timestamp of the newest input, -inf before any input.
  virtual double last_input_time() const = 0;
};

// Passes an external state straight through (e.g. motion capture or the
// simulator's ground truth). Out-of-order inputs are dropped.
class FeedthroughEstimator : public Estimator {
 public:
  void add_state(const QuadState& state) override;
  std::optional<QuadState> estimate(double now) override;
  double last_input_time() const override;

 private:
  std::optional<QuadState> latest_;
};

struct EkfParams {
  double gyro_noise{1e-3};
  double accel_noise{1e-2};
  double gyro_bias_walk{1e-5};
  double accel_bias_walk{1e-4};
  double pose_pos_noise{1e-3};   // [m]
  double pose_att_noise{2e-3};   // [rad]
  double g{9.81};
};

enum class EkfUpdateResult { kAccepted, kRejected };

// Error-state EKF on [dp, dtheta, dv, dbw, dba] (15 states), IMU-driven
// strapdown propagation with pose updates. Attitude error is a body-frame
// rotation vector applied on the right.
class EkfEstimator : public Estimator {
 public:
  using Cov = Eigen::Matrix<double, 15, 15>;

  explicit EkfEstimator(const EkfParams& params);

  // Initialize (or re-initialize) the nominal state.
  void add_state(const QuadState& state) override;
  void add_imu(const ImuSample& imu) override;
  void add_pose(double t, const Vec3& p, const Quat& q) override;

  std::optional<QuadState> estimate(double now) override;
  double last_input_time() const override;

  // Strapdown propagation by dt using one IMU sample. Throws
  // std::invalid_argument on dt outside (0, 0.1] and NumericalError when the
  // covariance loses positive semidefiniteness.
  void propagate(const ImuSample& imu, double dt);

  // Pose update with Mahalanobis gating (chi-square 0.999, 6 dof).
  EkfUpdateResult update_pose(const Vec3& p, const Quat& q);

  const QuadState& state() const { return x_; }
  const Cov& covariance() const { return cov_; }
  int rejected_updates() const { return rejected_; }
  const Eigen::Matrix<double, 6, 1>& last_innovation() const { return innovation_; }

 private:
  void check_psd(const char* where);

  EkfParams params_;
  QuadState x_;
  Cov cov_;
  bool initialized_{false};
  double last_input_t_;
  int rejected_{0};
  Eigen::Matrix<double, 6, 1> innovation_{Eigen::Matrix<double, 6, 1>::Zero()};
  std::optional<ImuSample> last_imu_;
};

}  // namespace quadstack
