#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "quadstack/references.hpp"

namespace quadstack {

inline constexpr const char* kTrajectoryHeader =
    "t,px,py,pz,qw,qx,qy,qz,vx,vy,vz,wx,wy,wz,ax,ay,az,jx,jy,jz,sx,sy,sz,"
    "f1,f2,f3,f4";

// Write all 27 columns with %.17g (lossless for doubles) and \n line endings.
void trajectory_save(const SampledTrajectory& traj, std::ostream& out);
void trajectory_save(const SampledTrajectory& traj,
                     const std::filesystem::path& path);

// Strict parser: exact header, exactly 27 numeric fields per row, strictly
// increasing timestamps, at least two rows. Throws ParseError naming the
// offending line.
SampledTrajectory trajectory_load(std::istream& in,
                                  const std::string& name = "<stream>");
SampledTrajectory trajectory_load(const std::filesystem::path& path);

// Format a double with %.17g (shared by every CSV writer so outputs stay
// byte-stable).
std::string format_g17(double v);

}  // namespace quadstack
