#include "quadstack/controller_geometric.hpp"

#include "quadstack/quaternion.hpp"

namespace quadstack {

GeometricController::GeometricController(const QuadrotorModel& model,
                                         const GeometricGains& gains)
    : model_(model), gains_(gains) {}

Command GeometricController::control(const QuadState& state, const Setpoint& sp) {
  const QuadState& ref = sp.state;

  const Vec3 a_des = ref.a + gains_.kp.cwiseProduct(ref.p - state.p) +
                     gains_.kv.cwiseProduct(ref.v - state.v);
  const Vec3 a_tot = a_des - model_.gravity_world();

  if (a_tot.norm() <= 1e-6) {
    // Free fall: attitude undefined, hold the last command.
    singular_ = true;
    if (have_prev_) {
      Command held = prev_cmd_;
      held.set_time(state.t);
      return held;
    }
    Command fallback =
        Command::thrust_bodyrate(state.t, model_.hover_thrust(), Vec3::Zero());
    prev_cmd_ = fallback;
    have_prev_ = true;
    return fallback;
  }
  singular_ = false;

  // Desired attitude: z along a_tot, heading from the reference yaw (taken
  // from the reference attitude's x axis projection).
  const Vec3 z_b = a_tot.normalized();
  const Vec3 x_ref = ref.q * Vec3::UnitX();
  const double yaw = std::atan2(x_ref.y(), x_ref.x());
  const Vec3 x_c(std::cos(yaw), std::sin(yaw), 0.0);
  Vec3 y_b = z_b.cross(x_c);
  Mat3 rot;
  if (y_b.norm() < 1e-9) {
    const Vec3 y_c(-std::sin(yaw), std::cos(yaw), 0.0);
    const Vec3 x_b = y_c.cross(z_b).normalized();
    rot.col(0) = x_b;
    rot.col(1) = z_b.cross(x_b);
    rot.col(2) = z_b;
  } else {
    y_b.normalize();
    rot.col(0) = y_b.cross(z_b);
    rot.col(1) = y_b;
    rot.col(2) = z_b;
  }
  const Quat q_des(rot);

  // Thrust along the current body z so tilt errors don't bleed into climb.
  const Vec3 z_cur = state.q * Vec3::UnitZ();
  double thrust = model_.mass * a_tot.dot(z_cur);
  thrust = std::clamp(thrust, 4.0 * model_.f_min, 4.0 * model_.f_max);

  // Tilt-prioritized attitude error: factor the error quaternion into a
  // rotation about body z (yaw) and the remainder (tilt).
  Quat q_err = state.q.conjugate() * q_des;
  if (q_err.w() < 0.0) q_err.coeffs() *= -1.0;
  Vec3 e_att;
  const double nyw = std::sqrt(q_err.w() * q_err.w() + q_err.z() * q_err.z());
  if (nyw < 1e-6) {
    e_att = quat_to_rotvec(q_err);  // 90 deg yaw singularity: plain log
  } else {
    const Quat q_yaw(q_err.w() / nyw, 0.0, 0.0, q_err.z() / nyw);
    const Quat q_tilt = q_err * q_yaw.conjugate();
    e_att = quat_to_rotvec(q_tilt) + quat_to_rotvec(q_yaw);
  }

  Vec3 rate = gains_.katt.cwiseProduct(e_att) + ref.w;
  for (int i = 0; i < 3; ++i)
    rate(i) = std::clamp(rate(i), -model_.w_max, model_.w_max);

  Command cmd = Command::thrust_bodyrate(state.t, thrust, rate);
  prev_cmd_ = cmd;
  have_prev_ = true;
  return cmd;
}

}  // namespace quadstack
