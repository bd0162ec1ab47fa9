#pragma once

#include "quadstack/types.hpp"

namespace quadstack {

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

// Rotation vector (axis * angle) -> unit quaternion. Small angles use the
// first-order expansion to stay well conditioned.
Quat quat_from_rotvec(const Vec3& r);

// Unit quaternion -> rotation vector, shortest arc (angle in [0, pi]).
Vec3 quat_to_rotvec(const Quat& q);

// One step of attitude propagation with constant body rate w over dt:
// q <- q (x) exp(0.5 * w * dt), renormalized. Exact for constant w.
Quat quaternion_integrate(const Quat& q, const Vec3& w, double dt);

}  // namespace quadstack
