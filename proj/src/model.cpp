#include "quadstack/model.hpp"

#include <Eigen/SVD>

#include "quadstack/errors.hpp"

namespace quadstack {

Mat4 QuadrotorModel::allocation_matrix() const {
  const double l = arm_length / std::sqrt(2.0);
  // Rotor positions: FL (+l,+l), FR (+l,-l), RL (-l,+l), RR (-l,-l).
  // tau_x = sum y_i f_i, tau_y = -sum x_i f_i, tau_z = sum s_i c_tau f_i.
  Mat4 a;
  a << 1.0, 1.0, 1.0, 1.0,
       l, -l, l, -l,
       -l, -l, l, l,
       c_tau * spin_signs(0), c_tau * spin_signs(1),
       c_tau * spin_signs(2), c_tau * spin_signs(3);
  return a;
}

void QuadrotorModel::validate() const {
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw ConfigError("model: mass must be positive");
  if (!(inertia.array() > 0.0).all() || !inertia.allFinite())
    throw ConfigError("model: inertia diagonal must be positive");
  if (!(arm_length > 0.0)) throw ConfigError("model: arm_length must be positive");
  if (!(c_f > 0.0)) throw ConfigError("model: c_f must be positive");
  if (!std::isfinite(c_tau)) throw ConfigError("model: c_tau must be finite");
  if (!(f_min >= 0.0) || !(f_max > f_min))
    throw ConfigError("model: need 0 <= f_min < f_max");
  if (!(motor_tc > 0.0)) throw ConfigError("model: motor_tc must be positive");
  if (!(w_max > 0.0)) throw ConfigError("model: w_max must be positive");
  if (!(g > 0.0)) throw ConfigError("model: g must be positive");
  for (int i = 0; i < 4; ++i) {
    if (std::abs(spin_signs(i)) != 1.0)
      throw ConfigError("model: spin_signs entries must be +1 or -1");
  }

  Eigen::JacobiSVD<Mat4> svd(allocation_matrix());
  const double smin = svd.singularValues()(3);
  const double smax = svd.singularValues()(0);
  if (!(smin > 0.0) || smax / smin >= 1e6)
    throw ConfigError("model: allocation matrix is singular or near-singular");
}

std::pair<double, Vec3> allocate(const Vec4& thrusts, const QuadrotorModel& model) {
  if (!thrusts.allFinite())
    throw std::invalid_argument("allocate: non-finite thrusts");
  const Vec4 wrench = model.allocation_matrix() * thrusts;
  return {wrench(0), wrench.tail<3>()};
}

Vec4 allocate_inverse(double collective, const Vec3& torque,
                      const QuadrotorModel& model, bool* clamped) {
  if (!std::isfinite(collective) || !torque.allFinite())
    throw std::invalid_argument("allocate_inverse: non-finite wrench");
  Vec4 rhs;
  rhs << collective, torque;
  Vec4 f = model.allocation_matrix().partialPivLu().solve(rhs);
  bool any = false;
  for (int i = 0; i < 4; ++i) {
    if (f(i) < model.f_min || f(i) > model.f_max) {
      any = true;
      f(i) = std::clamp(f(i), model.f_min, model.f_max);
    }
  }
  if (clamped) *clamped = any;
  return f;
}

}  // namespace quadstack
