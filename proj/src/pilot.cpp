#include "quadstack/pilot.hpp"

#include <cmath>

#include "quadstack/errors.hpp"
#include "quadstack/flatness.hpp"

namespace quadstack {

void PipelineConfig::validate() const {
  if (!(control_rate >= 50.0) || !(control_rate <= 1000.0))
    throw ConfigError("pipeline: control_rate outside [50, 1000] Hz");
  if (!(sampler_window > 0.0))
    throw ConfigError("pipeline: sampler_window must be positive");
  if (!(feedthrough_timeout > 0.0))
    throw ConfigError("pipeline: feedthrough_timeout must be positive");
  if (outer == OuterControllerKind::kMpc) mpc.validate();
}

void GuardConfig::validate() const {
  for (int i = 0; i < 3; ++i) {
    if (!(box_min(i) < box_max(i)))
      throw ConfigError("guard: box_min must be strictly below box_max");
  }
  backup.validate();
  if (backup.outer == OuterControllerKind::kMpc)
    throw ConfigError("guard: backup pipeline must use the geometric controller");
}

void PilotConfig::validate() const {
  pipeline.validate();
  guard.validate();
}

Pilot::Modules Pilot::build_modules(const PipelineConfig& cfg,
                                    const QuadrotorModel& model) {
  Modules m;
  m.config = cfg;
  if (cfg.estimator == EstimatorKind::kEkf)
    m.estimator = std::make_unique<EkfEstimator>(cfg.ekf);
  else
    m.estimator = std::make_unique<FeedthroughEstimator>();

  if (cfg.outer == OuterControllerKind::kMpc)
    m.mpc = std::make_unique<MpcController>(model, cfg.mpc);
  else
    m.geometric = std::make_unique<GeometricController>(model, cfg.geometric);

  if (cfg.inner == InnerControllerKind::kIndi) {
    m.indi = std::make_unique<IndiController>(model, cfg.indi);
    m.gyro_diff = std::make_unique<GyroDifferentiator>(cfg.indi.cutoff_hz,
                                                       cfg.control_rate);
  }
  return m;
}

Pilot::Pilot(const PilotConfig& config, const QuadrotorModel& model,
             std::shared_ptr<Bridge> bridge,
             std::shared_ptr<Bridge> backup_bridge)
    : config_(config),
      model_(model),
      bridge_(std::move(bridge)),
      backup_bridge_(std::move(backup_bridge)),
      guard_(config.guard) {
  config_.validate();
  model_.validate();
  if (!bridge_) throw ConfigError("pilot: no bridge");
  main_ = build_modules(config_.pipeline, model_);
  backup_ = build_modules(config_.guard.backup, model_);
}

void Pilot::set_hover_reference(const HoverReference& ref) {
  if (!ref.p.allFinite() || !std::isfinite(ref.yaw))
    throw std::invalid_argument("pilot: non-finite hover reference");
  reference_ = ref;
}

void Pilot::set_trajectory(const SampledTrajectory& traj, double start_time) {
  traj.validate();
  reference_ = traj;
  traj_start_ = start_time;
  main_.sampler_progress = traj.start_time();
  backup_.sampler_progress = traj.start_time();
}

void Pilot::set_velocity_reference(const VelocityReference& ref, const Vec3& p0,
                                   double yaw0) {
  ref.validate();
  reference_ = ref;
  vel_ref_p0_ = p0;
  vel_ref_yaw0_ = yaw0;
}

void Pilot::set_polynomial_reference(const PolynomialReference& ref) {
  ref.validate();
  reference_ = ref;
}

void Pilot::set_feedthrough(bool enabled) { feedthrough_enabled_ = enabled; }

void Pilot::feed_command(const Command& cmd) {
  if (cmd.valid()) fed_command_ = cmd;
}

void Pilot::add_state_estimate(const QuadState& state) {
  main_.estimator->add_state(state);
  backup_.estimator->add_state(state);
}

void Pilot::add_imu(const ImuSample& imu) {
  main_.estimator->add_imu(imu);
  backup_.estimator->add_imu(imu);
}

void Pilot::add_pose(double t, const Vec3& p, const Quat& q) {
  main_.estimator->add_pose(t, p, q);
  backup_.estimator->add_pose(t, p, q);
}

void Pilot::reset_guard() { guard_.reset(); }

Command Pilot::safety_hover(double now) const {
  return Command::thrust_bodyrate(now, model_.hover_thrust(), Vec3::Zero());
}

std::vector<Setpoint> Pilot::horizon(Modules& mod, const QuadState& est,
                                     double now, int n, double dt_h) {
  std::vector<Setpoint> out;

  if (auto* hover = std::get_if<HoverReference>(&reference_)) {
    FlatOutput flat;
    flat.p = hover->p;
    flat.yaw = hover->yaw;
    for (int k = 0; k < n; ++k) {
      flat.t = now + k * dt_h;
      out.push_back(flatness_setpoint(flat, model_));
    }
    return out;
  }

  if (auto* traj = std::get_if<SampledTrajectory>(&reference_)) {
    const double t_traj = now - traj_start_ + traj->start_time();
    if (mod.config.sampler == SamplerKind::kPosition) {
      auto [sps, progress] = sample_position_based(
          *traj, est.p, mod.sampler_progress, n, dt_h, mod.config.sampler_window);
      mod.sampler_progress = progress;
      return sps;
    }
    return sample_time_based(*traj, t_traj, n, dt_h);
  }

  if (auto* vel = std::get_if<VelocityReference>(&reference_)) {
    for (int k = 0; k < n; ++k) {
      const double t = now + k * dt_h;
      const double dt_ref =
          std::clamp(t - vel->t_start, 0.0, vel->duration);
      FlatOutput flat;
      flat.t = t;
      flat.p = vel_ref_p0_ + vel->v * dt_ref;
      flat.yaw = vel_ref_yaw0_ + vel->yaw_rate * dt_ref;
      const bool active = t >= vel->t_start && t <= vel->t_start + vel->duration;
      if (active) {
        flat.v = vel->v;
        flat.yaw_rate = vel->yaw_rate;
      }
      out.push_back(flatness_setpoint(flat, model_));
    }
    return out;
  }

  if (auto* poly = std::get_if<PolynomialReference>(&reference_)) {
    for (int k = 0; k < n; ++k)
      out.push_back(sample_polynomial(*poly, now + k * dt_h, model_));
    return out;
  }

  // No reference set: hold position.
  FlatOutput flat;
  flat.p = est.p;
  const Vec3 x_b = est.q * Vec3::UnitX();
  flat.yaw = std::atan2(x_b.y(), x_b.x());
  for (int k = 0; k < n; ++k) {
    flat.t = now + k * dt_h;
    out.push_back(flatness_setpoint(flat, model_));
  }
  return out;
}

Command Pilot::run_pipeline(Modules& mod, const QuadState& est, double now) {
  Command cmd;
  if (mod.mpc) {
    const auto refs = horizon(mod, est, now, mod.config.mpc.horizon,
                              mod.config.mpc.dt);
    cmd = mod.mpc->control(est, refs);
    status_.mpc = mod.mpc->stats();
    ++status_.mpc_solves;
    status_.mpc_iterations_total += status_.mpc.iterations;
    status_.mpc_iterations_max =
        std::max(status_.mpc_iterations_max, status_.mpc.iterations);
    if (status_.mpc.warned) ++status_.mpc_warnings;
  } else {
    const auto refs = horizon(mod, est, now, 1, control_period());
    cmd = mod.geometric->control(est, refs.front());
    status_.geometric_singular = mod.geometric->singular();
  }

  if (mod.indi) {
    mod.gyro_diff->update(est.w);
    const auto alpha = mod.gyro_diff->estimate();
    cmd = mod.indi->control(cmd, est, alpha);
    status_.indi_fallback = mod.indi->fallback_active();
  }
  cmd.set_time(now);
  return cmd;
}

Command Pilot::dispatch(const Command& cmd, double now) {
  Bridge* primary = (use_backup_ && backup_bridge_) ? backup_bridge_.get()
                                                    : bridge_.get();
  if (primary->send(cmd, now)) {
    ++status_.commands_sent;
    return cmd;
  }
  status_.bridge_failed = true;
  // Last resort: push a safety hover through the other transport.
  Bridge* alt = (primary == bridge_.get()) ? backup_bridge_.get() : bridge_.get();
  const Command hover = safety_hover(now);
  if (alt && alt->send(hover, now)) {
    ++status_.commands_sent;
    return hover;
  }
  return cmd;
}

Command Pilot::step(double now) {
  Modules& mod = use_backup_ ? backup_ : main_;

  const auto est = mod.estimator->estimate(now);
  const double timeout = 2.0 * control_period();
  const bool stale = !est || (now - mod.estimator->last_input_time()) > timeout + 1e-9;
  if (stale) {
    status_.degraded = true;
    return dispatch(safety_hover(now), now);
  }
  status_.degraded = false;

  // Guard runs on the fresh estimate before any controller.
  if (guard_.check(*est) == GuardVerdict::kViolation && !use_backup_) {
    use_backup_ = true;
    ++status_.guard_switches;
    status_.backup_active = true;
    const Vec3 x_b = est->q * Vec3::UnitX();
    HoverReference hold;
    hold.p = est->p;
    hold.yaw = std::atan2(x_b.y(), x_b.x());
    reference_ = hold;
    feedthrough_enabled_ = false;
  }

  Modules& active = use_backup_ ? backup_ : main_;

  if (feedthrough_enabled_ && !use_backup_) {
    const double timeout_ft = config_.pipeline.feedthrough_timeout;
    if (fed_command_ && now - fed_command_->t() <= timeout_ft + 1e-9) {
      status_.feedthrough_active = true;
      Command cmd = *fed_command_;
      cmd.set_time(now);
      return dispatch(cmd, now);
    }
    if (status_.feedthrough_active) {
      // Stream went quiet: take over holding the current position.
      status_.feedthrough_active = false;
      feedthrough_enabled_ = false;
      const Vec3 x_b = est->q * Vec3::UnitX();
      HoverReference hold;
      hold.p = est->p;
      hold.yaw = std::atan2(x_b.y(), x_b.x());
      reference_ = hold;
    }
  }

  return dispatch(run_pipeline(active, *est, now), now);
}

}  // namespace quadstack
