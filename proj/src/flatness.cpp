#include "quadstack/flatness.hpp"

#include "quadstack/quaternion.hpp"

namespace quadstack {

QuadState flatness_state(const FlatOutput& in, const QuadrotorModel& m) {
  const Vec3 thrust_acc = in.a - m.gravity_world();  // a + g e_z
  const double c = thrust_acc.norm();
  if (c <= 1e-6) throw FlatnessSingularity(in.t);

  const Vec3 z_b = thrust_acc / c;

  // Attitude: body z along thrust, heading from yaw. Near pitch/roll of
  // 90 deg the usual z_b x x_c construction degenerates; fall back to the
  // heading's y axis.
  const Vec3 x_c(std::cos(in.yaw), std::sin(in.yaw), 0.0);
  const Vec3 y_c(-std::sin(in.yaw), std::cos(in.yaw), 0.0);

  // Time derivatives of the thrust direction from jerk and snap.
  const double c_dot = z_b.dot(in.j);
  const Vec3 zb_dot = (in.j - c_dot * z_b) / c;
  const double c_ddot = zb_dot.dot(in.j) + z_b.dot(in.s);
  const Vec3 zb_ddot = (in.s - c_ddot * z_b - 2.0 * c_dot * zb_dot) / c;

  Mat3 rot;
  Vec3 w_body, wdot_body;
  const Vec3 n = z_b.cross(x_c);
  const double ny = n.norm();
  if (ny < 1e-9) {
    // Pitched to 90 deg: the projection construction degenerates. Build the
    // frame off the heading's y axis; rates keep only the tilt part.
    Vec3 x_b = y_c.cross(z_b).normalized();
    Vec3 y_b = z_b.cross(x_b);
    rot.col(0) = x_b;
    rot.col(1) = y_b;
    rot.col(2) = z_b;
    w_body = Vec3(-y_b.dot(zb_dot), x_b.dot(zb_dot), in.yaw_rate * z_b.z());
    wdot_body = Vec3(-y_b.dot(zb_ddot), x_b.dot(zb_ddot),
                     in.yaw_acc * z_b.z() + in.yaw_rate * zb_dot.z());
  } else {
    const Vec3 y_b = n / ny;
    const Vec3 x_b = y_b.cross(z_b);
    rot.col(0) = x_b;
    rot.col(1) = y_b;
    rot.col(2) = z_b;

    // Exact rates of the constructed frame. From R' = R w^ the columns give
    // w1 = -y_b . z_b', w2 = x_b . z_b', w3 = -x_b . y_b', and with
    // n = z_b x x_c the unit-vector derivatives reduce to dot products
    // against n' and n''.
    const Vec3 n_dot = zb_dot.cross(x_c) + in.yaw_rate * z_b.cross(y_c);
    const Vec3 n_ddot = zb_ddot.cross(x_c) +
                        2.0 * in.yaw_rate * zb_dot.cross(y_c) +
                        in.yaw_acc * z_b.cross(y_c) -
                        in.yaw_rate * in.yaw_rate * n;
    const Vec3 yb_dot = (n_dot - y_b.dot(n_dot) * y_b) / ny;
    const Vec3 xb_dot = yb_dot.cross(z_b) + y_b.cross(zb_dot);

    w_body = Vec3(-y_b.dot(zb_dot), x_b.dot(zb_dot), -x_b.dot(n_dot) / ny);
    wdot_body = Vec3(
        -yb_dot.dot(zb_dot) - y_b.dot(zb_ddot),
        xb_dot.dot(zb_dot) + x_b.dot(zb_ddot),
        -(xb_dot.dot(n_dot) + x_b.dot(n_ddot)) / ny +
            x_b.dot(n_dot) * y_b.dot(n_dot) / (ny * ny));
  }
  Quat q(rot);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() *= -1.0;

  const Mat3 inertia = m.inertia_matrix();
  const Vec3 torque = inertia * wdot_body + w_body.cross(inertia * w_body);

  QuadState st;
  st.t = in.t;
  st.p = in.p;
  st.q = q;
  st.v = in.v;
  st.w = w_body;
  st.a = in.a;
  st.wd = wdot_body;
  st.j = in.j;
  st.s = in.s;
  st.fd = allocate_inverse(m.mass * c, torque, m);
  st.f = st.fd;
  return st;
}

Setpoint flatness_setpoint(const FlatOutput& in, const QuadrotorModel& m) {
  Setpoint sp;
  sp.state = flatness_state(in, m);
  sp.input = Command::single_rotor(in.t, sp.state.fd);
  return sp;
}

bool setpoint_feasible(const Setpoint& sp, const QuadrotorModel& m, double tol) {
  for (int i = 0; i < 4; ++i) {
    if (sp.state.fd(i) < m.f_min - tol || sp.state.fd(i) > m.f_max + tol)
      return false;
  }
  // If the inverse allocation had to clamp, the thrust sum no longer matches
  // the acceleration the setpoint claims.
  const double need = m.mass * (sp.state.a - m.gravity_world()).norm();
  return std::abs(sp.state.fd.sum() - need) <= std::max(tol, 1e-9 * need);
}

}  // namespace quadstack
