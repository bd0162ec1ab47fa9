#pragma once

#include <string>

#include "quadstack/model.hpp"
#include "quadstack/types.hpp"

namespace quadstack {

// Flat output of the quadrotor: position and its first four time derivatives
// plus yaw and its first two. Everything else in a Setpoint follows from
// these via the differential flatness of the dynamics.
struct FlatOutput {
  double t{0.0};
  Vec3 p{Vec3::Zero()};
  Vec3 v{Vec3::Zero()};
  Vec3 a{Vec3::Zero()};
  Vec3 j{Vec3::Zero()};
  Vec3 s{Vec3::Zero()};
  double yaw{0.0};
  double yaw_rate{0.0};
  double yaw_acc{0.0};
};

// Total commanded acceleration passed through zero: attitude is undefined.
class FlatnessSingularity : public std::runtime_error {
 public:
  explicit FlatnessSingularity(double t)
      : std::runtime_error("flatness: free-fall singularity at t=" +
                           std::to_string(t)),
        t_(t) {}
  double t() const { return t_; }

 private:
  double t_;
};

// Map a flat output to the full state: attitude from thrust direction + yaw,
// bodyrate from jerk, angular acceleration from snap, per-rotor thrusts from
// the inverse allocation. Throws FlatnessSingularity when ||a - g_w|| <= 1e-6.
QuadState flatness_state(const FlatOutput& flat, const QuadrotorModel& model);

// flatness_state plus the single-rotor command that attains it.
Setpoint flatness_setpoint(const FlatOutput& flat, const QuadrotorModel& model);

// True when the setpoint's rotor forces are consistent (no clamping happened
// in the inverse allocation) and within [f_min, f_max].
bool setpoint_feasible(const Setpoint& sp, const QuadrotorModel& model,
                       double tol = 1e-6);

}  // namespace quadstack
