#include "quadstack/references.hpp"

#include <algorithm>
#include <stdexcept>

namespace quadstack {

void VelocityReference::validate() const {
  if (!v.allFinite() || !std::isfinite(yaw_rate))
    throw std::invalid_argument("velocity reference: non-finite");
  if (!(duration > 0.0))
    throw std::invalid_argument("velocity reference: duration must be positive");
}

void PolynomialReference::validate() const {
  if (!(duration > 0.0))
    throw std::invalid_argument("polynomial reference: duration must be positive");
  for (const auto& axis : pos) {
    if (axis.empty())
      throw std::invalid_argument("polynomial reference: empty axis coefficients");
    if (axis.size() > 12)
      throw std::invalid_argument("polynomial reference: position degree > 11");
  }
  if (yaw.size() > 6)
    throw std::invalid_argument("polynomial reference: yaw degree > 5");
}

void SampledTrajectory::validate() const {
  if (setpoints.size() < 2)
    throw std::invalid_argument("trajectory: needs at least 2 setpoints");
  for (size_t i = 0; i < setpoints.size(); ++i) {
    if (setpoints[i].state.t != setpoints[i].input.t())
      throw std::invalid_argument("trajectory: setpoint state/input time mismatch");
    if (i > 0 && !(setpoints[i].state.t > setpoints[i - 1].state.t))
      throw std::invalid_argument("trajectory: timestamps not strictly increasing");
  }
}

std::array<double, 5> polyval_derivs(const std::vector<double>& coeffs, double x) {
  std::array<double, 5> out{};
  std::vector<double> c = coeffs;
  for (int order = 0; order < 5; ++order) {
    // Horner on the current derivative's coefficients.
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
    out[order] = acc;
    // Differentiate in place for the next order.
    if (c.size() <= 1) {
      c.assign(1, 0.0);
    } else {
      for (size_t k = 1; k < c.size(); ++k) c[k - 1] = c[k] * double(k);
      c.pop_back();
    }
  }
  return out;
}

Setpoint sample_polynomial(const PolynomialReference& ref, double t,
                           const QuadrotorModel& model) {
  ref.validate();
  const double t_end = ref.t_start + ref.duration;
  const double tc = std::clamp(t, ref.t_start, t_end);
  const double x = tc - ref.t_start;

  FlatOutput flat;
  flat.t = t;
  for (int axis = 0; axis < 3; ++axis) {
    const auto d = polyval_derivs(ref.pos[axis], x);
    flat.p(axis) = d[0];
    flat.v(axis) = d[1];
    flat.a(axis) = d[2];
    flat.j(axis) = d[3];
    flat.s(axis) = d[4];
  }
  if (!ref.yaw.empty()) {
    const auto d = polyval_derivs(ref.yaw, x);
    flat.yaw = d[0];
    flat.yaw_rate = d[1];
    flat.yaw_acc = d[2];
  }

  if (t != tc) {
    // Clamped to a boundary: if the boundary is (numerically) at rest, make
    // the hold exact, otherwise keep the boundary derivatives.
    const double moving = flat.v.norm() + flat.a.norm() + flat.j.norm() +
                          flat.s.norm() + std::abs(flat.yaw_rate) +
                          std::abs(flat.yaw_acc);
    if (moving < 1e-9) {
      flat.v.setZero();
      flat.a.setZero();
      flat.j.setZero();
      flat.s.setZero();
      flat.yaw_rate = 0.0;
      flat.yaw_acc = 0.0;
    }
  }
  return flatness_setpoint(flat, model);
}

}  // namespace quadstack
