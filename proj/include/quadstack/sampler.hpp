#pragma once

#include <utility>
#include <vector>

#include "quadstack/references.hpp"

namespace quadstack {

// Reference at an arbitrary time: linear interpolation of the translational
// states, slerp for attitude, clamped to the ends. An exact sample hit is
// returned as stored.
Setpoint trajectory_interpolate(const SampledTrajectory& traj, double t);

// Horizon of n setpoints at t, t + dt_h, ..., t + (n-1) dt_h.
std::vector<Setpoint> sample_time_based(const SampledTrajectory& traj, double t,
                                        int n, double dt_h);

// Progress tracking by closest point: searches the window
// [prev_progress, prev_progress + window] of trajectory time for the stored
// sample closest to the current position (earliest wins on ties), then
// samples the horizon from there. Returns the horizon and the new progress.
// Progress never moves backwards.
std::pair<std::vector<Setpoint>, double> sample_position_based(
    const SampledTrajectory& traj, const Vec3& position, double prev_progress,
    int n, double dt_h, double window);

}  // namespace quadstack
