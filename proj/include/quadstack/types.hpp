#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace quadstack {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Quat = Eigen::Quaterniond;

// Frames: world z points up, gravity is (0,0,-g). Body frame sits at the
// center of gravity, x forward, z along collective thrust. Position, velocity
// and the higher translational derivatives are world-frame; bodyrate and
// torque are body-frame. Quaternions rotate body to world, stored (w,x,y,z).

// Full vehicle state. Everything defaults to zero / identity so a
// default-constructed state is a valid rest state at the origin.
struct QuadState {
  double t{0.0};
  Vec3 p{Vec3::Zero()};
  Quat q{Quat::Identity()};
  Vec3 v{Vec3::Zero()};
  Vec3 w{Vec3::Zero()};   // bodyrate [rad/s]
  Vec3 a{Vec3::Zero()};   // linear acceleration, world
  Vec3 wd{Vec3::Zero()};  // angular acceleration, body
  Vec3 j{Vec3::Zero()};   // jerk, world
  Vec3 s{Vec3::Zero()};   // snap, world
  Vec3 bw{Vec3::Zero()};  // gyro bias
  Vec3 ba{Vec3::Zero()};  // accel bias
  Vec4 fd{Vec4::Zero()};  // desired per-rotor thrusts [N]
  Vec4 f{Vec4::Zero()};   // actual per-rotor thrusts [N]

  bool valid() const {
    return std::isfinite(t) && p.allFinite() && q.coeffs().allFinite() &&
           v.allFinite() && w.allFinite() && a.allFinite() &&
           wd.allFinite() && j.allFinite() && s.allFinite() &&
           bw.allFinite() && ba.allFinite() && fd.allFinite() &&
           f.allFinite() && std::abs(q.norm() - 1.0) <= 1e-9;
  }

  void normalize() { q.normalize(); }
};

enum class CommandMode { kSingleRotorThrusts, kCollectiveThrustBodyrate };

// Low-level command. Exactly one payload is meaningful depending on mode;
// accessing the other one throws, so a consumer can't silently read garbage.
class Command {
 public:
  Command() = default;  // zero single-rotor thrusts

  static Command single_rotor(double t, const Vec4& thrusts) {
    Command c;
    c.t_ = t;
    c.mode_ = CommandMode::kSingleRotorThrusts;
    c.thrusts_ = thrusts;
    return c;
  }

  static Command thrust_bodyrate(double t, double collective, const Vec3& bodyrate) {
    Command c;
    c.t_ = t;
    c.mode_ = CommandMode::kCollectiveThrustBodyrate;
    c.collective_ = collective;
    c.bodyrate_ = bodyrate;
    return c;
  }

  double t() const { return t_; }
  void set_time(double t) { t_ = t; }
  CommandMode mode() const { return mode_; }

  const Vec4& thrusts() const {
    if (mode_ != CommandMode::kSingleRotorThrusts)
      throw std::logic_error("command: thrusts() on a collective-thrust/bodyrate command");
    return thrusts_;
  }

  double collective_thrust() const {
    if (mode_ != CommandMode::kCollectiveThrustBodyrate)
      throw std::logic_error("command: collective_thrust() on a single-rotor command");
    return collective_;
  }

  const Vec3& bodyrate() const {
    if (mode_ != CommandMode::kCollectiveThrustBodyrate)
      throw std::logic_error("command: bodyrate() on a single-rotor command");
    return bodyrate_;
  }

  bool valid() const {
    if (!std::isfinite(t_)) return false;
    if (mode_ == CommandMode::kSingleRotorThrusts) return thrusts_.allFinite();
    return std::isfinite(collective_) && bodyrate_.allFinite();
  }

 private:
  double t_{0.0};
  CommandMode mode_{CommandMode::kSingleRotorThrusts};
  Vec4 thrusts_{Vec4::Zero()};
  double collective_{0.0};
  Vec3 bodyrate_{Vec3::Zero()};
};

// Reference state plus the input that attains it. state.t == input.t().
struct Setpoint {
  QuadState state;
  Command input;
};

struct ImuSample {
  double t{0.0};
  Vec3 gyro{Vec3::Zero()};   // body rates [rad/s]
  Vec3 accel{Vec3::Zero()};  // specific force, body [m/s^2]
};

// Body-frame force/torque pair.
struct Wrench {
  Vec3 force{Vec3::Zero()};
  Vec3 torque{Vec3::Zero()};
};

}  // namespace quadstack
