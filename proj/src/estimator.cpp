#include "quadstack/estimator.hpp"

#include <limits>

#include <Eigen/Eigenvalues>

#include "quadstack/errors.hpp"
#include "quadstack/quaternion.hpp"

namespace quadstack {

namespace {
// chi-square inverse CDF at 0.999 for 6 degrees of freedom
constexpr double kGate999Dof6 = 22.457744484;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}  // namespace

void FeedthroughEstimator::add_state(const QuadState& state) {
  if (!state.p.allFinite() || !state.q.coeffs().allFinite()) return;
  if (latest_ && state.t < latest_->t) return;  // drop regressions
  latest_ = state;
}

std::optional<QuadState> FeedthroughEstimator::estimate(double now) {
  if (!latest_) return std::nullopt;
  QuadState out = *latest_;
  out.t = now;
  out.normalize();
  return out;
}

double FeedthroughEstimator::last_input_time() const {
  return latest_ ? latest_->t : kNegInf;
}

EkfEstimator::EkfEstimator(const EkfParams& params)
    : params_(params), cov_(Cov::Identity() * 1e-6), last_input_t_(kNegInf) {}

void EkfEstimator::add_state(const QuadState& state) {
  x_ = state;
  x_.normalize();
  cov_ = Cov::Identity() * 1e-6;
  initialized_ = true;
  last_input_t_ = std::max(last_input_t_, state.t);
  last_imu_.reset();
}

void EkfEstimator::add_imu(const ImuSample& imu) {
  if (!initialized_) return;
  if (last_imu_) {
    const double dt = imu.t - last_imu_->t;
    if (dt > 0.0 && dt <= 0.1) propagate(imu, dt);
  }
  last_imu_ = imu;
  last_input_t_ = std::max(last_input_t_, imu.t);
}

void EkfEstimator::add_pose(double t, const Vec3& p, const Quat& q) {
  if (!initialized_) return;
  update_pose(p, q);
  last_input_t_ = std::max(last_input_t_, t);
}

std::optional<QuadState> EkfEstimator::estimate(double now) {
  if (!initialized_) return std::nullopt;
  QuadState out = x_;
  out.t = now;
  return out;
}

double EkfEstimator::last_input_time() const { return last_input_t_; }

void EkfEstimator::propagate(const ImuSample& imu, double dt) {
  if (!(dt > 0.0) || dt > 0.1)
    throw std::invalid_argument("ekf: propagate dt outside (0, 0.1]");

  const Vec3 gyro = imu.gyro - x_.bw;
  const Vec3 accel = imu.accel - x_.ba;  // specific force
  const Mat3 rot = x_.q.toRotationMatrix();
  const Vec3 a_world = rot * accel + Vec3(0.0, 0.0, -params_.g);

  // Nominal state
  x_.p += x_.v * dt + 0.5 * a_world * dt * dt;
  x_.v += a_world * dt;
  x_.q = quaternion_integrate(x_.q, gyro, dt);
  x_.w = gyro;
  x_.a = a_world;
  x_.t = imu.t;

  // Error-state Jacobian, first order: F = I + A dt
  Cov f = Cov::Identity();
  f.block<3, 3>(0, 6) = Mat3::Identity() * dt;            // dp <- dv
  f.block<3, 3>(6, 3) = -rot * skew(accel) * dt;          // dv <- dtheta
  f.block<3, 3>(6, 12) = -rot * dt;                       // dv <- dba
  f.block<3, 3>(3, 3) = Mat3::Identity() - skew(gyro) * dt;
  f.block<3, 3>(3, 9) = -Mat3::Identity() * dt;           // dtheta <- dbw

  Cov q = Cov::Zero();
  const double gn = params_.gyro_noise * params_.gyro_noise * dt;
  const double an = params_.accel_noise * params_.accel_noise * dt;
  const double gw = params_.gyro_bias_walk * params_.gyro_bias_walk * dt;
  const double aw = params_.accel_bias_walk * params_.accel_bias_walk * dt;
  q.block<3, 3>(3, 3) = Mat3::Identity() * gn;
  q.block<3, 3>(6, 6) = Mat3::Identity() * an;
  q.block<3, 3>(9, 9) = Mat3::Identity() * gw;
  q.block<3, 3>(12, 12) = Mat3::Identity() * aw;

  cov_ = f * cov_ * f.transpose() + q;
  cov_ = 0.5 * (cov_ + cov_.transpose()).eval();
  check_psd("propagate");
}

EkfUpdateResult EkfEstimator::update_pose(const Vec3& p, const Quat& q_meas) {
  using Vec6 = Eigen::Matrix<double, 6, 1>;
  using Mat6 = Eigen::Matrix<double, 6, 6>;
  using Mat6x15 = Eigen::Matrix<double, 6, 15>;

  Vec6 nu;
  nu.head<3>() = p - x_.p;
  nu.tail<3>() = quat_to_rotvec(x_.q.conjugate() * q_meas);
  innovation_ = nu;

  Mat6x15 h = Mat6x15::Zero();
  h.block<3, 3>(0, 0) = Mat3::Identity();
  h.block<3, 3>(3, 3) = Mat3::Identity();

  Mat6 r = Mat6::Zero();
  r.topLeftCorner<3, 3>() =
      Mat3::Identity() * params_.pose_pos_noise * params_.pose_pos_noise;
  r.bottomRightCorner<3, 3>() =
      Mat3::Identity() * params_.pose_att_noise * params_.pose_att_noise;

  const Mat6 s = h * cov_ * h.transpose() + r;
  const Mat6 s_inv = s.llt().solve(Mat6::Identity());
  const double d2 = nu.dot(s_inv * nu);
  if (d2 > kGate999Dof6) {
    ++rejected_;
    return EkfUpdateResult::kRejected;
  }

  const Eigen::Matrix<double, 15, 6> k = cov_ * h.transpose() * s_inv;
  const Eigen::Matrix<double, 15, 1> dx = k * nu;

  x_.p += dx.segment<3>(0);
  x_.q = x_.q * quat_from_rotvec(dx.segment<3>(3));
  x_.q.normalize();
  x_.v += dx.segment<3>(6);
  x_.bw += dx.segment<3>(9);
  x_.ba += dx.segment<3>(12);

  // Joseph form keeps the covariance symmetric PSD under roundoff.
  const Cov ikh = Cov::Identity() - k * h;
  cov_ = ikh * cov_ * ikh.transpose() + k * r * k.transpose();
  cov_ = 0.5 * (cov_ + cov_.transpose()).eval();
  check_psd("update");
  return EkfUpdateResult::kAccepted;
}

void EkfEstimator::check_psd(const char* where) {
  Eigen::SelfAdjointEigenSolver<Cov> eig(cov_, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues()(0) < -1e-9)
    throw NumericalError(std::string("ekf: covariance not PSD after ") + where);
}

}  // namespace quadstack
