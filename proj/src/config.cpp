#include "quadstack/config.hpp"

#include <yaml-cpp/yaml.h>

#include "quadstack/errors.hpp"

namespace quadstack {
namespace {

// yaml-cpp exceptions carry a mark; wrap them with the key path so errors
// read like "config.yaml: model.mass: bad conversion (line 4)".
template <typename T>
T get(const YAML::Node& node, const std::string& path, const T& fallback) {
  if (!node) return fallback;
  try {
    return node.as<T>();
  } catch (const YAML::Exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

Vec3 get_vec3(const YAML::Node& node, const std::string& path, const Vec3& fallback) {
  if (!node) return fallback;
  if (!node.IsSequence() || node.size() != 3)
    throw ConfigError(path + ": expected a 3-element list");
  return Vec3(get<double>(node[0], path, 0.0), get<double>(node[1], path, 0.0),
              get<double>(node[2], path, 0.0));
}

Vec2 get_vec2(const YAML::Node& node, const std::string& path, const Vec2& fallback) {
  if (!node) return fallback;
  if (!node.IsSequence() || node.size() != 2)
    throw ConfigError(path + ": expected a 2-element list");
  return Vec2(get<double>(node[0], path, 0.0), get<double>(node[1], path, 0.0));
}

Vec4 get_vec4(const YAML::Node& node, const std::string& path, const Vec4& fallback) {
  if (!node) return fallback;
  if (!node.IsSequence() || node.size() != 4)
    throw ConfigError(path + ": expected a 4-element list");
  return Vec4(get<double>(node[0], path, 0.0), get<double>(node[1], path, 0.0),
              get<double>(node[2], path, 0.0), get<double>(node[3], path, 0.0));
}

QuadrotorModel parse_model(const YAML::Node& node, QuadrotorModel model) {
  if (!node) return model;
  model.mass = get(node["mass"], "model.mass", model.mass);
  model.inertia = get_vec3(node["inertia"], "model.inertia", model.inertia);
  model.arm_length = get(node["arm_length"], "model.arm_length", model.arm_length);
  model.spin_signs = get_vec4(node["spin_signs"], "model.spin_signs", model.spin_signs);
  model.c_f = get(node["c_f"], "model.c_f", model.c_f);
  model.c_tau = get(node["c_tau"], "model.c_tau", model.c_tau);
  model.f_min = get(node["f_min"], "model.f_min", model.f_min);
  model.f_max = get(node["f_max"], "model.f_max", model.f_max);
  model.motor_tc = get(node["motor_tc"], "model.motor_tc", model.motor_tc);
  model.w_max = get(node["w_max"], "model.w_max", model.w_max);
  model.drag_coeffs = get_vec3(node["drag"], "model.drag", model.drag_coeffs);
  model.g = get(node["gravity"], "model.gravity", model.g);
  return model;
}

IntegratorKind parse_integrator(const std::string& s, const std::string& path) {
  if (s == "rk4") return IntegratorKind::kRk4;
  if (s == "euler") return IntegratorKind::kExplicitEuler;
  if (s == "symplectic") return IntegratorKind::kSymplecticEuler;
  throw ConfigError(path + ": unknown integrator '" + s + "'");
}

PipelineConfig parse_pipeline(const YAML::Node& node, PipelineConfig cfg,
                              const std::string& prefix) {
  if (!node) return cfg;
  cfg.control_rate = get(node["control_rate"], prefix + ".control_rate", cfg.control_rate);

  if (auto est = node["estimator"]) {
    const std::string kind = get<std::string>(est["type"], prefix + ".estimator.type", "feedthrough");
    if (kind == "feedthrough") cfg.estimator = EstimatorKind::kFeedthrough;
    else if (kind == "ekf") cfg.estimator = EstimatorKind::kEkf;
    else throw ConfigError(prefix + ".estimator.type: unknown '" + kind + "'");
    cfg.ekf.gyro_noise = get(est["gyro_noise"], prefix + ".estimator.gyro_noise", cfg.ekf.gyro_noise);
    cfg.ekf.accel_noise = get(est["accel_noise"], prefix + ".estimator.accel_noise", cfg.ekf.accel_noise);
    cfg.ekf.gyro_bias_walk = get(est["gyro_bias_walk"], prefix + ".estimator.gyro_bias_walk", cfg.ekf.gyro_bias_walk);
    cfg.ekf.accel_bias_walk = get(est["accel_bias_walk"], prefix + ".estimator.accel_bias_walk", cfg.ekf.accel_bias_walk);
    cfg.ekf.pose_pos_noise = get(est["pose_pos_noise"], prefix + ".estimator.pose_pos_noise", cfg.ekf.pose_pos_noise);
    cfg.ekf.pose_att_noise = get(est["pose_att_noise"], prefix + ".estimator.pose_att_noise", cfg.ekf.pose_att_noise);
  }

  if (auto sam = node["sampler"]) {
    const std::string kind = get<std::string>(sam["type"], prefix + ".sampler.type", "time");
    if (kind == "time") cfg.sampler = SamplerKind::kTime;
    else if (kind == "position") cfg.sampler = SamplerKind::kPosition;
    else throw ConfigError(prefix + ".sampler.type: unknown '" + kind + "'");
    cfg.sampler_window = get(sam["window"], prefix + ".sampler.window", cfg.sampler_window);
  }

  if (auto ctl = node["controller"]) {
    const std::string kind = get<std::string>(ctl["type"], prefix + ".controller.type", "geometric");
    if (kind == "geometric") cfg.outer = OuterControllerKind::kGeometric;
    else if (kind == "mpc") cfg.outer = OuterControllerKind::kMpc;
    else throw ConfigError(prefix + ".controller.type: unknown '" + kind + "'");
    if (auto geo = ctl["geometric"]) {
      cfg.geometric.kp = get_vec3(geo["kp"], prefix + ".controller.geometric.kp", cfg.geometric.kp);
      cfg.geometric.kv = get_vec3(geo["kv"], prefix + ".controller.geometric.kv", cfg.geometric.kv);
      cfg.geometric.katt = get_vec3(geo["katt"], prefix + ".controller.geometric.katt", cfg.geometric.katt);
    }
    if (auto mpc = ctl["mpc"]) {
      cfg.mpc.horizon = get(mpc["horizon"], prefix + ".controller.mpc.horizon", cfg.mpc.horizon);
      cfg.mpc.dt = get(mpc["dt"], prefix + ".controller.mpc.dt", cfg.mpc.dt);
      cfg.mpc.w_p = get(mpc["w_p"], prefix + ".controller.mpc.w_p", cfg.mpc.w_p);
      cfg.mpc.w_att = get(mpc["w_att"], prefix + ".controller.mpc.w_att", cfg.mpc.w_att);
      cfg.mpc.w_v = get(mpc["w_v"], prefix + ".controller.mpc.w_v", cfg.mpc.w_v);
      cfg.mpc.w_w = get(mpc["w_w"], prefix + ".controller.mpc.w_w", cfg.mpc.w_w);
      cfg.mpc.w_u = get(mpc["w_u"], prefix + ".controller.mpc.w_u", cfg.mpc.w_u);
      cfg.mpc.max_iters = get(mpc["max_iters"], prefix + ".controller.mpc.max_iters", cfg.mpc.max_iters);
      cfg.mpc.tol = get(mpc["tol"], prefix + ".controller.mpc.tol", cfg.mpc.tol);
    }
  }

  if (auto inner = node["inner"]) {
    const std::string kind = get<std::string>(inner["type"], prefix + ".inner.type", "none");
    if (kind == "none") cfg.inner = InnerControllerKind::kNone;
    else if (kind == "indi") cfg.inner = InnerControllerKind::kIndi;
    else throw ConfigError(prefix + ".inner.type: unknown '" + kind + "'");
    cfg.indi.rate_gain = get_vec3(inner["rate_gain"], prefix + ".inner.rate_gain", cfg.indi.rate_gain);
    cfg.indi.cutoff_hz = get(inner["cutoff_hz"], prefix + ".inner.cutoff_hz", cfg.indi.cutoff_hz);
  }

  if (auto br = node["bridge"]) {
    const std::string kind = get<std::string>(br, prefix + ".bridge", "sim");
    if (kind == "sim") cfg.bridge = BridgeKind::kSim;
    else if (kind == "log") cfg.bridge = BridgeKind::kLog;
    else if (kind == "sim_and_log") cfg.bridge = BridgeKind::kSimAndLog;
    else throw ConfigError(prefix + ".bridge: unknown '" + kind + "'");
  }

  cfg.feedthrough_timeout = get(node["feedthrough_timeout"],
                                prefix + ".feedthrough_timeout", cfg.feedthrough_timeout);
  return cfg;
}

ExperimentConfig from_root(const YAML::Node& root) {
  ExperimentConfig cfg;
  cfg.model = parse_model(root["model"], cfg.model);
  cfg.pilot.pipeline = parse_pipeline(root["pipeline"], cfg.pilot.pipeline, "pipeline");

  if (auto guard = root["guard"]) {
    cfg.pilot.guard.enabled = get(guard["enabled"], "guard.enabled", cfg.pilot.guard.enabled);
    cfg.pilot.guard.box_min = get_vec3(guard["box_min"], "guard.box_min", cfg.pilot.guard.box_min);
    cfg.pilot.guard.box_max = get_vec3(guard["box_max"], "guard.box_max", cfg.pilot.guard.box_max);
    cfg.pilot.guard.backup = parse_pipeline(guard["backup"], cfg.pilot.guard.backup, "guard.backup");
  }
  // Backup control rate follows the main pipeline unless set explicitly.
  if (!(root["guard"] && root["guard"]["backup"] && root["guard"]["backup"]["control_rate"]))
    cfg.pilot.guard.backup.control_rate = cfg.pilot.pipeline.control_rate;

  if (auto sim = root["simulation"]) {
    cfg.sim.dt = get(sim["dt"], "simulation.dt", cfg.sim.dt);
    if (sim["integrator"])
      cfg.sim.integrator = parse_integrator(
          get<std::string>(sim["integrator"], "simulation.integrator", "rk4"),
          "simulation.integrator");
    cfg.sim.rate_gain = get_vec3(sim["rate_gain"], "simulation.rate_gain", cfg.sim.rate_gain);
    cfg.sim.state_latency = get(sim["state_latency"], "simulation.state_latency", cfg.sim.state_latency);
    if (auto imu = sim["imu"]) {
      cfg.sim.imu.rate = get(imu["rate"], "simulation.imu.rate", cfg.sim.imu.rate);
      cfg.sim.imu.gyro_std = get(imu["gyro_std"], "simulation.imu.gyro_std", cfg.sim.imu.gyro_std);
      cfg.sim.imu.accel_std = get(imu["accel_std"], "simulation.imu.accel_std", cfg.sim.imu.accel_std);
      cfg.sim.imu.gyro_walk = get(imu["gyro_walk"], "simulation.imu.gyro_walk", cfg.sim.imu.gyro_walk);
      cfg.sim.imu.accel_walk = get(imu["accel_walk"], "simulation.imu.accel_walk", cfg.sim.imu.accel_walk);
    }
  }

  if (auto exp = root["experiment"]) {
    if (auto traj = exp["trajectory"]) {
      const std::string kind = get<std::string>(traj["type"], "experiment.trajectory.type", "circle");
      if (kind == "hover") cfg.trajectory.kind = TrajectorySource::Kind::kHover;
      else if (kind == "circle") cfg.trajectory.kind = TrajectorySource::Kind::kCircle;
      else if (kind == "lemniscate") cfg.trajectory.kind = TrajectorySource::Kind::kLemniscate;
      else if (kind == "file") cfg.trajectory.kind = TrajectorySource::Kind::kFile;
      else throw ConfigError("experiment.trajectory.type: unknown '" + kind + "'");
      cfg.trajectory.center = get_vec2(traj["center"], "experiment.trajectory.center", cfg.trajectory.center);
      cfg.trajectory.z = get(traj["z"], "experiment.trajectory.z", cfg.trajectory.z);
      cfg.trajectory.radius = get(traj["radius"], "experiment.trajectory.radius", cfg.trajectory.radius);
      cfg.trajectory.amplitude = get(traj["amplitude"], "experiment.trajectory.amplitude", cfg.trajectory.amplitude);
      cfg.trajectory.speed = get(traj["speed"], "experiment.trajectory.speed", cfg.trajectory.speed);
      cfg.trajectory.laps = get(traj["laps"], "experiment.trajectory.laps", cfg.trajectory.laps);
      cfg.trajectory.ramp_time = get(traj["ramp"], "experiment.trajectory.ramp", cfg.trajectory.ramp_time);
      cfg.trajectory.hover_p = get_vec3(traj["position"], "experiment.trajectory.position", cfg.trajectory.hover_p);
      cfg.trajectory.hover_yaw = get(traj["yaw"], "experiment.trajectory.yaw", cfg.trajectory.hover_yaw);
      cfg.trajectory.file = get<std::string>(traj["file"], "experiment.trajectory.file", cfg.trajectory.file);
    }
    cfg.duration = get(exp["duration"], "experiment.duration", cfg.duration);
    cfg.latency = get(exp["latency"], "experiment.latency", cfg.latency);
    cfg.seed = get<uint64_t>(exp["seed"], "experiment.seed", cfg.seed);
    cfg.out_dir = get<std::string>(exp["out_dir"], "experiment.out_dir", cfg.out_dir);
  }
  return cfg;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& yaml_text,
                                         const std::string& name) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(name + ": " + e.what());
  }
  return from_root(root);
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::BadFile&) {
    throw ConfigError("cannot open config: " + path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return from_root(root);
}

}  // namespace quadstack
