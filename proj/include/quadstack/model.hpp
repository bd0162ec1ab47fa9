#pragma once

#include <utility>

#include "quadstack/types.hpp"

namespace quadstack {

// Physical parameters of the vehicle plus rotor geometry.
//
// Rotor layout is an X configuration, ordered front-left, front-right,
// rear-left, rear-right. Rotor arms are at 45 deg to the body axes, so each
// rotor sits at (+-l, +-l, 0) with l = arm_length / sqrt(2). spin_signs holds
// the sign of the reaction torque each rotor applies about body z.
struct QuadrotorModel {
  double mass{0.75};                          // [kg]
  Vec3 inertia{2.5e-3, 2.1e-3, 4.3e-3};        // diagonal of J [kg m^2]
  double arm_length{0.15};                    // hub-to-rotor distance [m]
  Vec4 spin_signs{1.0, -1.0, -1.0, 1.0};
  double c_f{1.277e-6};                       // thrust coefficient [N s^2/rad^2]
  double c_tau{0.016};                        // drag torque per thrust [m]
  double f_min{0.0};                          // per-rotor thrust floor [N]
  double f_max{9.5};                          // per-rotor thrust ceiling [N]
  double motor_tc{0.0391};                    // motor speed time constant [s]
  double w_max{12.0};                         // bodyrate command limit [rad/s]
  Vec3 drag_coeffs{Vec3::Zero()};             // linear body drag [N s/m]
  double g{9.81};

  Mat3 inertia_matrix() const { return inertia.asDiagonal(); }
  Vec3 gravity_world() const { return Vec3(0.0, 0.0, -g); }
  double hover_thrust() const { return mass * g; }
  Vec4 hover_rotor_thrusts() const { return Vec4::Constant(mass * g / 4.0); }
  double max_motor_speed() const { return std::sqrt(f_max / c_f); }
  double min_motor_speed() const { return std::sqrt(std::max(f_min, 0.0) / c_f); }

  // Rows map per-rotor thrusts to (collective, tau_x, tau_y, tau_z).
  Mat4 allocation_matrix() const;

  // Throws ConfigError on non-physical parameters or a (near-)singular
  // allocation matrix.
  void validate() const;
};

// Per-rotor thrusts -> collective thrust [N] and body torque [N m].
// Throws std::invalid_argument on non-finite input.
std::pair<double, Vec3> allocate(const Vec4& thrusts, const QuadrotorModel& model);

// Exact inverse of allocate, then clamped per component to [f_min, f_max].
// *clamped (if given) reports whether any component was clamped.
Vec4 allocate_inverse(double collective, const Vec3& torque,
                      const QuadrotorModel& model, bool* clamped = nullptr);

}  // namespace quadstack
