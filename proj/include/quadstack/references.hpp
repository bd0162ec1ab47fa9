#pragma once

#include <array>
#include <vector>

#include "quadstack/flatness.hpp"
#include "quadstack/model.hpp"
#include "quadstack/types.hpp"

namespace quadstack {

struct HoverReference {
  Vec3 p{Vec3::Zero()};
  double yaw{0.0};
};

// Constant-velocity reference; the pilot integrates it into a moving hover
// target anchored at the position where the reference was activated.
struct VelocityReference {
  Vec3 v{Vec3::Zero()};
  double yaw_rate{0.0};
  double t_start{0.0};
  double duration{0.0};

  void validate() const;
};

// Per-axis position polynomials (coefficients in ascending powers of
// (t - t_start)) plus a yaw polynomial. Degrees are capped so the flat
// derivatives stay meaningful: position <= 11, yaw <= 5.
struct PolynomialReference {
  std::array<std::vector<double>, 3> pos;
  std::vector<double> yaw;
  double t_start{0.0};
  double duration{0.0};

  void validate() const;
};

// Time-indexed list of setpoints with strictly increasing timestamps.
struct SampledTrajectory {
  std::vector<Setpoint> setpoints;

  void validate() const;  // throws std::invalid_argument
  double start_time() const { return setpoints.front().state.t; }
  double end_time() const { return setpoints.back().state.t; }
  double duration() const { return end_time() - start_time(); }
};

// Value and first four derivatives of sum c_k x^k at x.
std::array<double, 5> polyval_derivs(const std::vector<double>& coeffs, double x);

// Evaluate the polynomial reference at time t through the flatness map.
// Queries outside [t_start, t_start + duration] clamp to the boundary; if the
// boundary is at rest the derivatives are exactly zero there.
Setpoint sample_polynomial(const PolynomialReference& ref, double t,
                           const QuadrotorModel& model);

}  // namespace quadstack
