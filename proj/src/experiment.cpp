#include "quadstack/experiment.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "quadstack/errors.hpp"
#include "quadstack/generators.hpp"
#include "quadstack/sampler.hpp"
#include "quadstack/trajectory_io.hpp"

namespace quadstack {

SampledTrajectory build_trajectory(const TrajectorySource& src,
                                   const QuadrotorModel& model) {
  switch (src.kind) {
    case TrajectorySource::Kind::kCircle:
      return generate_circle(src.center, src.radius, src.speed, src.z,
                             src.laps, model, src.ramp_time);
    case TrajectorySource::Kind::kLemniscate:
      return generate_lemniscate(src.center, src.amplitude, src.speed, src.z,
                                 src.laps, model, src.ramp_time);
    case TrajectorySource::Kind::kFile:
      return trajectory_load(std::filesystem::path(src.file));
    case TrajectorySource::Kind::kHover:
      throw std::invalid_argument("hover source has no trajectory");
  }
  throw std::logic_error("unreachable");
}

void ExperimentConfig::validate() const {
  model.validate();
  pilot.validate();
  if (!(duration > 0.0)) throw ConfigError("experiment: duration must be positive");
  if (latency < 0.0) throw ConfigError("experiment: negative latency");
  if (!(sim.dt > 0.0)) throw ConfigError("experiment: sim dt must be positive");
  // The pilot schedule must land exactly on sim steps.
  const double steps = 1.0 / (pilot.pipeline.control_rate * sim.dt);
  if (std::abs(steps - std::round(steps)) > 1e-9 || steps < 1.0 - 1e-9)
    throw ConfigError("experiment: control period must be a multiple of sim dt");
}

MetricsReport compute_rmse(const std::vector<QuadState>& states,
                           const SampledTrajectory& reference) {
  reference.validate();
  if (states.empty()) throw std::invalid_argument("metrics: no states");
  const double t_lo = states.front().t;
  const double t_hi = states.back().t;
  if (t_hi < reference.start_time() || t_lo > reference.end_time())
    throw std::invalid_argument("metrics: state log and reference do not overlap in time");

  MetricsReport m;
  Vec3 sq_sum = Vec3::Zero();
  for (const auto& st : states) {
    const Setpoint ref = trajectory_interpolate(reference, st.t);
    const Vec3 err = st.p - ref.state.p;
    sq_sum += err.cwiseProduct(err);
    m.max_pos_error = std::max(m.max_pos_error, err.norm());
    m.max_speed = std::max(m.max_speed, st.v.norm());
    m.max_accel = std::max(m.max_accel, st.a.norm());
  }
  const double n = double(states.size());
  m.per_axis_rmse = (sq_sum / n).cwiseSqrt();
  m.rmse = std::sqrt(sq_sum.sum() / n);
  return m;
}

namespace {

void write_state_row(std::ostream& out, const QuadState& st, const Vec4& motors) {
  const double cols[31] = {
      st.t,     st.p.x(), st.p.y(), st.p.z(), st.q.w(),  st.q.x(),  st.q.y(),
      st.q.z(), st.v.x(), st.v.y(), st.v.z(), st.w.x(),  st.w.y(),  st.w.z(),
      st.a.x(), st.a.y(), st.a.z(), st.j.x(), st.j.y(),  st.j.z(),  st.s.x(),
      st.s.y(), st.s.z(), st.fd(0), st.fd(1), st.fd(2),  st.fd(3),  motors(0),
      motors(1), motors(2), motors(3)};
  for (int i = 0; i < 31; ++i) {
    if (i) out << ',';
    out << format_g17(cols[i]);
  }
  out << '\n';
}

SampledTrajectory hover_reference_trajectory(const TrajectorySource& src,
                                             const QuadrotorModel& model,
                                             double duration) {
  FlatOutput flat;
  flat.p = src.hover_p;
  flat.yaw = src.hover_yaw;
  SampledTrajectory traj;
  flat.t = 0.0;
  traj.setpoints.push_back(flatness_setpoint(flat, model));
  flat.t = duration;
  traj.setpoints.push_back(flatness_setpoint(flat, model));
  return traj;
}

std::string format_latency_dir(double latency) {
  std::ostringstream ss;
  ss << "lat_" << format_g17(latency);
  return ss.str();
}

}  // namespace

MetricsReport run_experiment(const ExperimentConfig& config) {
  config.validate();

  const std::filesystem::path out_dir(config.out_dir);
  std::filesystem::create_directories(out_dir);

  const bool hover_only = config.trajectory.kind == TrajectorySource::Kind::kHover;
  SampledTrajectory traj = hover_only
                               ? hover_reference_trajectory(config.trajectory,
                                                            config.model,
                                                            config.duration)
                               : build_trajectory(config.trajectory, config.model);

  SimParams sim_params = config.sim;
  sim_params.command_latency = config.latency;
  sim_params.seed = config.seed;
  Simulator sim(config.model, sim_params);

  auto sim_bridge = std::make_shared<SimBridge>(&sim);
  auto log_bridge = std::make_shared<LogBridge>(out_dir / "command_log.csv");
  auto bridge = std::make_shared<CompositeBridge>(
      std::vector<std::shared_ptr<Bridge>>{sim_bridge, log_bridge});

  Pilot pilot(config.pilot, config.model, bridge);
  if (hover_only) {
    HoverReference ref;
    ref.p = config.trajectory.hover_p;
    ref.yaw = config.trajectory.hover_yaw;
    pilot.set_hover_reference(ref);
  } else {
    pilot.set_trajectory(traj, 0.0);
  }

  QuadState initial = traj.setpoints.front().state;
  initial.t = 0.0;
  sim.reset(initial);

  const double dt = sim_params.dt;
  const long period_steps =
      std::lround(1.0 / (config.pilot.pipeline.control_rate * dt));
  const long total_steps = std::lround(config.duration / dt);
  const bool use_ekf =
      config.pilot.pipeline.estimator == EstimatorKind::kEkf;

  std::ofstream state_log(out_dir / "state_log.csv", std::ios::binary);
  if (!state_log)
    throw std::runtime_error("cannot open state log in " + config.out_dir);
  state_log << kTrajectoryHeader << ",m1,m2,m3,m4" << '\n';
  write_state_row(state_log, sim.state().quad, sim.state().motor_speeds);

  std::vector<QuadState> history;
  history.reserve(size_t(total_steps) + 1);
  history.push_back(sim.state().quad);

  for (long k = 0; k < total_steps; ++k) {
    const double now = k * dt;
    if (k % period_steps == 0) {
      const QuadState fb = sim.feedback_state();
      if (use_ekf) {
        for (const auto& imu : sim.drain_imu()) pilot.add_imu(imu);
        pilot.add_pose(fb.t, fb.p, fb.q);
        if (k == 0) pilot.add_state_estimate(fb);  // initialize the filter
      } else {
        pilot.add_state_estimate(fb);
      }
      pilot.step(now);
    }
    sim.step();
    write_state_row(state_log, sim.state().quad, sim.state().motor_speeds);
    history.push_back(sim.state().quad);
  }

  MetricsReport metrics = compute_rmse(history, traj);
  metrics.guard_events = int(pilot.guard_events().size());
  metrics.solver.iterations_total = pilot.status().mpc_iterations_total;
  metrics.solver.iterations_max = pilot.status().mpc_iterations_max;
  metrics.solver.warnings = pilot.status().mpc_warnings;

  std::ofstream summary(out_dir / "summary.txt", std::ios::binary);
  summary << "duration " << format_g17(config.duration) << '\n'
          << "latency " << format_g17(config.latency) << '\n'
          << "seed " << config.seed << '\n'
          << "rmse " << format_g17(metrics.rmse) << '\n'
          << "rmse_x " << format_g17(metrics.per_axis_rmse.x()) << '\n'
          << "rmse_y " << format_g17(metrics.per_axis_rmse.y()) << '\n'
          << "rmse_z " << format_g17(metrics.per_axis_rmse.z()) << '\n'
          << "max_pos_error " << format_g17(metrics.max_pos_error) << '\n'
          << "max_speed " << format_g17(metrics.max_speed) << '\n'
          << "max_accel " << format_g17(metrics.max_accel) << '\n'
          << "guard_events " << metrics.guard_events << '\n'
          << "commands_sent " << pilot.status().commands_sent << '\n';
  if (pilot.status().mpc_solves > 0) {
    summary << "mpc_solves " << pilot.status().mpc_solves << '\n'
            << "mpc_iterations_total " << metrics.solver.iterations_total << '\n'
            << "mpc_iterations_max " << metrics.solver.iterations_max << '\n'
            << "mpc_warnings " << metrics.solver.warnings << '\n';
  }

  return metrics;
}

std::vector<std::pair<double, MetricsReport>> latency_sweep(
    const ExperimentConfig& config, const std::vector<double>& latencies) {
  if (latencies.size() < 2)
    throw std::invalid_argument("sweep: need at least two latencies");

  std::vector<std::pair<double, MetricsReport>> out;
  const std::filesystem::path base(config.out_dir);
  std::filesystem::create_directories(base);

  for (double latency : latencies) {
    ExperimentConfig cfg = config;
    cfg.latency = latency;
    cfg.out_dir = (base / format_latency_dir(latency)).string();
    out.emplace_back(latency, run_experiment(cfg));
  }

  std::ofstream table(base / "sweep.csv", std::ios::binary);
  table << "latency,rmse,rmse_x,rmse_y,rmse_z,max_pos_error,max_speed,"
           "max_accel,guard_events\n";
  for (const auto& [latency, m] : out) {
    table << format_g17(latency) << ',' << format_g17(m.rmse) << ','
          << format_g17(m.per_axis_rmse.x()) << ','
          << format_g17(m.per_axis_rmse.y()) << ','
          << format_g17(m.per_axis_rmse.z()) << ','
          << format_g17(m.max_pos_error) << ',' << format_g17(m.max_speed)
          << ',' << format_g17(m.max_accel) << ',' << m.guard_events << '\n';
  }
  return out;
}

std::vector<QuadState> load_state_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());

  const std::string name = path.filename().string();
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) throw ParseError(name + ":1: empty file", 1);
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::string expected = std::string(kTrajectoryHeader) + ",m1,m2,m3,m4";
  if (line != expected) throw ParseError(name + ":1: bad header", 1);

  std::vector<QuadState> states;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      char* end = nullptr;
      const double v = std::strtod(field.c_str(), &end);
      if (field.empty() || end != field.c_str() + field.size())
        throw ParseError(name + ":" + std::to_string(lineno) + ": bad number",
                         lineno);
      vals.push_back(v);
    }
    if (vals.size() != 31)
      throw ParseError(name + ":" + std::to_string(lineno) +
                           ": expected 31 columns",
                       lineno);
    QuadState st;
    st.t = vals[0];
    st.p = Vec3(vals[1], vals[2], vals[3]);
    st.q = Quat(vals[4], vals[5], vals[6], vals[7]).normalized();
    st.v = Vec3(vals[8], vals[9], vals[10]);
    st.w = Vec3(vals[11], vals[12], vals[13]);
    st.a = Vec3(vals[14], vals[15], vals[16]);
    st.j = Vec3(vals[17], vals[18], vals[19]);
    st.s = Vec3(vals[20], vals[21], vals[22]);
    st.fd = Vec4(vals[23], vals[24], vals[25], vals[26]);
    st.f = st.fd;
    states.push_back(st);
  }
  if (states.empty()) throw ParseError(name + ": no rows", lineno);
  return states;
}

}  // namespace quadstack
