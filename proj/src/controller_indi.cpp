#include "quadstack/controller_indi.hpp"

#include <cmath>

#include "quadstack/errors.hpp"

namespace quadstack {

Biquad::Biquad(double cutoff_hz, double sample_rate_hz) {
  if (!(cutoff_hz > 0.0) || !(sample_rate_hz > 2.0 * cutoff_hz))
    throw ConfigError("biquad: cutoff must sit below Nyquist");
  // RBJ low-pass, Q = 1/sqrt(2)
  const double w0 = 2.0 * M_PI * cutoff_hz / sample_rate_hz;
  const double cw = std::cos(w0);
  const double sw = std::sin(w0);
  const double alpha = sw / std::sqrt(2.0);
  const double a0 = 1.0 + alpha;
  b0_ = (1.0 - cw) / 2.0 / a0;
  b1_ = (1.0 - cw) / a0;
  b2_ = b0_;
  a1_ = (-2.0 * cw) / a0;
  a2_ = (1.0 - alpha) / a0;
}

double Biquad::process(double x) {
  if (!primed_) prime(x);
  // transposed direct form II
  const double y = b0_ * x + z1_;
  z1_ = b1_ * x - a1_ * y + z2_;
  z2_ = b2_ * x - a2_ * y;
  return y;
}

void Biquad::prime(double x) {
  // Steady state for constant input x (unity DC gain).
  const double y = x;
  z2_ = b2_ * x - a2_ * y;
  z1_ = b1_ * x - a1_ * y + z2_;
  primed_ = true;
}

GyroDifferentiator::GyroDifferentiator(double cutoff_hz, double sample_rate_hz)
    : rate_(sample_rate_hz), cutoff_(cutoff_hz) {
  for (auto& f : filt_) f = Biquad(cutoff_hz, sample_rate_hz);
}

void GyroDifferentiator::update(const Vec3& bodyrate) {
  if (count_ > 0) {
    const Vec3 raw = (bodyrate - prev_) * rate_;
    for (int i = 0; i < 3; ++i) value_(i) = filt_[i].process(raw(i));
  }
  prev_ = bodyrate;
  ++count_;
}

std::optional<Vec3> GyroDifferentiator::estimate() const {
  if (count_ < 3) return std::nullopt;
  return value_;
}

void GyroDifferentiator::reset() {
  for (auto& f : filt_) f = Biquad(cutoff_, rate_);
  prev_.setZero();
  value_.setZero();
  count_ = 0;
}

IndiController::IndiController(const QuadrotorModel& model,
                               const IndiParams& params)
    : model_(model), params_(params) {}

Command IndiController::control(const Command& outer, const QuadState& state,
                                const std::optional<Vec3>& angular_accel) {
  const Mat3 inertia = model_.inertia_matrix();

  double collective;
  Vec3 alpha_des;
  if (outer.mode() == CommandMode::kCollectiveThrustBodyrate) {
    collective = outer.collective_thrust();
    alpha_des = params_.rate_gain.cwiseProduct(outer.bodyrate() - state.w);
  } else {
    // Refine the outer loop's own rotor commands: keep its collective and
    // re-derive the angular acceleration it asked for.
    collective = outer.thrusts().sum();
    auto [c, torque] = allocate(outer.thrusts(), model_);
    (void)c;
    alpha_des = inertia.inverse() *
                (torque - state.w.cross(inertia * state.w));
  }

  Vec3 tau_cmd;
  if (!angular_accel) {
    // Non-incremental fallback: pure model inversion.
    fallback_ = true;
    tau_cmd = inertia * alpha_des + state.w.cross(inertia * state.w);
  } else {
    fallback_ = false;
    // Torque the rotors currently produce, incremented by the inertia-scaled
    // angular acceleration error.
    auto [c, tau_current] = allocate(state.f, model_);
    (void)c;
    tau_cmd = tau_current + inertia * (alpha_des - *angular_accel);
  }

  bool clamp_flag = false;
  const Vec4 thrusts = allocate_inverse(collective, tau_cmd, model_, &clamp_flag);
  clamped_ = clamp_flag;
  return Command::single_rotor(outer.t(), thrusts);
}

}  // namespace quadstack
