#include "quadstack/quaternion.hpp"

namespace quadstack {

Quat quat_from_rotvec(const Vec3& r) {
  const double angle = r.norm();
  if (angle < 1e-12) {
    Quat q(1.0, 0.5 * r.x(), 0.5 * r.y(), 0.5 * r.z());
    q.normalize();
    return q;
  }
  return Quat(Eigen::AngleAxisd(angle, r / angle));
}

Vec3 quat_to_rotvec(const Quat& q_in) {
  Quat q = q_in.normalized();
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  const double sin_half = q.vec().norm();
  if (sin_half < 1e-12) return 2.0 * q.vec();
  const double angle = 2.0 * std::atan2(sin_half, q.w());
  return (angle / sin_half) * q.vec();
}

Quat quaternion_integrate(const Quat& q, const Vec3& w, double dt) {
  Quat out = q * quat_from_rotvec(w * dt);
  out.normalize();
  return out;
}

}  // namespace quadstack
