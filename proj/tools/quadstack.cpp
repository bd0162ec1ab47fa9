// Command-line front end: closed-loop runs, latency sweeps, trajectory
// generation and checking, and log metrics.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "quadstack/config.hpp"
#include "quadstack/errors.hpp"
#include "quadstack/experiment.hpp"
#include "quadstack/flatness.hpp"
#include "quadstack/generators.hpp"
#include "quadstack/trajectory_io.hpp"

namespace {

using namespace quadstack;

void print_metrics(const MetricsReport& m) {
  std::printf("rmse: %.6g m\n", m.rmse);
  std::printf("rmse_xyz: %.6g %.6g %.6g m\n", m.per_axis_rmse.x(),
              m.per_axis_rmse.y(), m.per_axis_rmse.z());
  std::printf("max_pos_error: %.6g m\n", m.max_pos_error);
  std::printf("max_speed: %.6g m/s\n", m.max_speed);
  std::printf("max_accel: %.6g m/s^2\n", m.max_accel);
}

IntegratorKind integrator_from_string(const std::string& s) {
  if (s == "rk4") return IntegratorKind::kRk4;
  if (s == "euler") return IntegratorKind::kExplicitEuler;
  if (s == "symplectic") return IntegratorKind::kSymplecticEuler;
  throw ConfigError("unknown integrator '" + s + "' (rk4|euler|symplectic)");
}

struct CommonOpts {
  std::string config;
  std::optional<uint64_t> seed;
  std::string out;
  std::string integrator;
};

void add_common(CLI::App* cmd, CommonOpts* o) {
  cmd->add_option("--config", o->config, "YAML experiment config");
  cmd->add_option("--seed", o->seed, "RNG seed override");
  cmd->add_option("--out", o->out, "output directory override");
  cmd->add_option("--integrator", o->integrator,
                  "simulator integrator: rk4|euler|symplectic");
}

ExperimentConfig load_with_overrides(const CommonOpts& o) {
  ExperimentConfig cfg;
  if (!o.config.empty()) cfg = load_experiment_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (!o.integrator.empty())
    cfg.sim.integrator = integrator_from_string(o.integrator);
  return cfg;
}

int cmd_run(const CommonOpts& o, const std::optional<double>& latency) {
  ExperimentConfig cfg = load_with_overrides(o);
  if (latency) cfg.latency = *latency;
  const MetricsReport m = run_experiment(cfg);
  print_metrics(m);
  std::printf("guard_events: %d\n", m.guard_events);
  std::printf("outputs: %s\n", cfg.out_dir.c_str());
  return m.guard_events > 0 ? 2 : 0;
}

int cmd_sweep(const CommonOpts& o, const std::vector<double>& latencies) {
  if (latencies.size() < 2) {
    std::fprintf(stderr, "error: sweep needs at least two --latency values\n");
    return 1;
  }
  ExperimentConfig cfg = load_with_overrides(o);
  const auto rows = latency_sweep(cfg, latencies);
  int guard_total = 0;
  std::printf("%-12s %-12s %-12s\n", "latency_s", "rmse_m", "guard");
  for (const auto& [lat, m] : rows) {
    std::printf("%-12.6g %-12.6g %-12d\n", lat, m.rmse, m.guard_events);
    guard_total += m.guard_events;
  }
  std::printf("outputs: %s\n", cfg.out_dir.c_str());
  return guard_total > 0 ? 2 : 0;
}

int cmd_gen_traj(const CommonOpts& o) {
  ExperimentConfig cfg;
  if (!o.config.empty()) cfg = load_experiment_config(o.config);
  const std::string out = o.out.empty() ? "trajectory.csv" : o.out;
  using K = TrajectorySource::Kind;
  if (cfg.trajectory.kind == K::kHover || cfg.trajectory.kind == K::kFile)
    throw ConfigError("gen-traj needs a circle or lemniscate trajectory config");
  const SampledTrajectory traj = build_trajectory(cfg.trajectory, cfg.model);
  trajectory_save(traj, out);
  std::printf("%s: %zu samples, %.6g s\n", out.c_str(), traj.setpoints.size(),
              traj.duration());
  return 0;
}

int cmd_validate_traj(const std::string& file, const CommonOpts& o) {
  ExperimentConfig cfg;
  if (!o.config.empty()) cfg = load_experiment_config(o.config);
  const SampledTrajectory traj = trajectory_load(file);
  traj.validate();
  size_t infeasible = 0;
  for (const auto& sp : traj.setpoints)
    if (!setpoint_feasible(sp, cfg.model)) ++infeasible;
  if (infeasible > 0) {
    std::fprintf(stderr, "%s: %zu of %zu setpoints exceed rotor limits\n",
                 file.c_str(), infeasible, traj.setpoints.size());
    return 1;
  }
  std::printf("%s: OK (%zu samples, %.6g s, within rotor limits)\n",
              file.c_str(), traj.setpoints.size(), traj.duration());
  return 0;
}

int cmd_metrics(const std::string& log_file, const std::string& ref_file) {
  const std::vector<QuadState> states = load_state_log(log_file);
  const SampledTrajectory ref = trajectory_load(ref_file);
  const MetricsReport m = compute_rmse(states, ref);
  print_metrics(m);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quadstack: quadrotor flight stack simulator and experiments"};
  app.require_subcommand(1);

  CommonOpts run_opts;
  std::optional<double> run_latency;
  auto* run = app.add_subcommand("run", "closed-loop tracking experiment");
  add_common(run, &run_opts);
  run->add_option("--latency", run_latency, "command latency [s]");

  CommonOpts sweep_opts;
  std::vector<double> sweep_latencies;
  auto* sweep = app.add_subcommand("sweep", "same run at several latencies");
  add_common(sweep, &sweep_opts);
  sweep->add_option("--latency", sweep_latencies,
                    "command latency [s], repeat at least twice");

  CommonOpts gen_opts;
  auto* gen = app.add_subcommand("gen-traj", "write a trajectory CSV");
  add_common(gen, &gen_opts);

  CommonOpts val_opts;
  std::string val_file;
  auto* val = app.add_subcommand("validate-traj", "check a trajectory CSV");
  val->add_option("file", val_file, "trajectory CSV")->required();
  add_common(val, &val_opts);

  std::string met_log, met_ref;
  auto* met = app.add_subcommand("metrics", "tracking metrics from a state log");
  met->add_option("state_log", met_log, "state log CSV")->required();
  met->add_option("reference", met_ref, "reference trajectory CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) return cmd_run(run_opts, run_latency);
    if (sweep->parsed()) return cmd_sweep(sweep_opts, sweep_latencies);
    if (gen->parsed()) return cmd_gen_traj(gen_opts);
    if (val->parsed()) return cmd_validate_traj(val_file, val_opts);
    if (met->parsed()) return cmd_metrics(met_log, met_ref);
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
