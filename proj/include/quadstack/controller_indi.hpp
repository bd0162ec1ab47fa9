#pragma once

#include <optional>

#include "quadstack/model.hpp"
#include "quadstack/types.hpp"

namespace quadstack {

// Second-order Butterworth low-pass (one per axis is cheap enough to keep
// this a plain value type).
class Biquad {
 public:
  Biquad() = default;
  Biquad(double cutoff_hz, double sample_rate_hz);

  double process(double x);
  void prime(double x);  // settle internal state at a constant input

 private:
  double b0_{1.0}, b1_{0.0}, b2_{0.0}, a1_{0.0}, a2_{0.0};
  double z1_{0.0}, z2_{0.0};
  bool primed_{false};
};

// Angular acceleration from finite-differenced, low-pass filtered bodyrate
// measurements. Needs a few updates before the estimate is usable.
class GyroDifferentiator {
 public:
  GyroDifferentiator(double cutoff_hz, double sample_rate_hz);

  void update(const Vec3& bodyrate);
  std::optional<Vec3> estimate() const;
  void reset();

 private:
  double rate_;
  double cutoff_;
  Biquad filt_[3];
  Vec3 prev_{Vec3::Zero()};
  Vec3 value_{Vec3::Zero()};
  int count_{0};
};

struct IndiParams {
  Vec3 rate_gain{20.0, 20.0, 8.0};
  double cutoff_hz{40.0};
};

// Incremental inner loop: converts the outer command into per-rotor thrusts
// by correcting the torque implied by the *measured* angular acceleration,
// which absorbs unmodeled torques without knowing them. Falls back to plain
// model inversion while no angular acceleration estimate exists.
class IndiController {
 public:
  IndiController(const QuadrotorModel& model, const IndiParams& params);

  Command control(const Command& outer, const QuadState& state,
                  const std::optional<Vec3>& angular_accel);

  bool fallback_active() const { return fallback_; }
  bool clamped() const { return clamped_; }

 private:
  QuadrotorModel model_;
  IndiParams params_;
  bool fallback_{false};
  bool clamped_{false};
};

}  // namespace quadstack
