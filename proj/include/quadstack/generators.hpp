#pragma once

#include "quadstack/model.hpp"
#include "quadstack/references.hpp"

namespace quadstack {

// Trajectories are sampled at this rate [Hz].
inline constexpr double kTrajectorySampleRate = 100.0;

// Horizontal circle of given radius, flown at constant speed (after an
// optional cosine speed ramp of ramp_time at each end), starting at
// center + (radius, 0) and ending after `laps` laps. Yaw is held at zero.
// Throws std::invalid_argument on non-positive radius/speed/laps or a ramp
// longer than the path allows.
SampledTrajectory generate_circle(const Vec2& center, double radius,
                                  double speed, double z, int laps,
                                  const QuadrotorModel& model,
                                  double ramp_time = 0.0);

// Bernoulli lemniscate x = A cos(th)/(1+sin^2 th), y = A sin(th)cos(th)/
// (1+sin^2 th), traversed at constant arc-length speed (same optional ramp),
// starting at the (A, 0) tip. The nose follows the path tangent; holding a
// fixed heading through the steeply banked tips would demand more yaw torque
// than the rotor geometry can deliver.
SampledTrajectory generate_lemniscate(const Vec2& center, double amplitude,
                                      double speed, double z, int laps,
                                      const QuadrotorModel& model,
                                      double ramp_time = 0.0);

}  // namespace quadstack
