#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "quadstack/pilot.hpp"
#include "quadstack/simulator.hpp"

namespace quadstack {

// What to fly.
struct TrajectorySource {
  enum class Kind { kHover, kCircle, kLemniscate, kFile };
  Kind kind{Kind::kCircle};

  Vec2 center{Vec2::Zero()};
  double z{1.0};
  double radius{4.0};
  double amplitude{5.0};
  double speed{5.0};
  int laps{1};
  double ramp_time{0.0};

  Vec3 hover_p{0.0, 0.0, 1.0};
  double hover_yaw{0.0};

  std::string file;
};

// Builds the sampled trajectory (kHover has no trajectory; callers handle it).
SampledTrajectory build_trajectory(const TrajectorySource& src,
                                   const QuadrotorModel& model);

struct ExperimentConfig {
  QuadrotorModel model;
  PilotConfig pilot;
  SimParams sim;
  TrajectorySource trajectory;
  double duration{10.0};
  double latency{0.0};  // command-path latency [s]
  uint64_t seed{0};
  std::string out_dir{"out"};

  void validate() const;
};

struct SolverStats {
  long iterations_total{0};
  int iterations_max{0};
  long warnings{0};
};

struct MetricsReport {
  double rmse{0.0};
  Vec3 per_axis_rmse{Vec3::Zero()};
  double max_pos_error{0.0};
  double max_speed{0.0};
  double max_accel{0.0};
  int guard_events{0};
  SolverStats solver;
};

// Position tracking metrics: each state pairs with the reference
// interpolated at the same timestamp (clamped to the reference range).
// Throws std::invalid_argument when the time ranges don't overlap at all.
MetricsReport compute_rmse(const std::vector<QuadState>& states,
                           const SampledTrajectory& reference);

// Closed-loop run: simulator stepping at sim.dt, pilot at the configured
// control rate, logs (state_log.csv, command_log.csv, summary.txt) under
// out_dir. Returns the tracking metrics. Fully deterministic: identical
// configs and seeds produce byte-identical logs.
MetricsReport run_experiment(const ExperimentConfig& config);

// Runs the same experiment at several command latencies (shared seed),
// writing each run under out_dir/lat_<latency>/ plus a sweep.csv table.
// Requires at least two latencies.
std::vector<std::pair<double, MetricsReport>> latency_sweep(
    const ExperimentConfig& config, const std::vector<double>& latencies);

// Reads back a state_log.csv written by run_experiment.
std::vector<QuadState> load_state_log(const std::filesystem::path& path);

}  // namespace quadstack
