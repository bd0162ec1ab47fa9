#include "quadstack/simulator.hpp"

#include <cmath>

#include "quadstack/errors.hpp"
#include "quadstack/quaternion.hpp"

namespace quadstack {

namespace {
constexpr double kTimeEps = 1e-9;
}

DelayLine::DelayLine(double latency) : latency_(latency) {
  if (latency < 0.0 || !std::isfinite(latency))
    throw std::invalid_argument("delay line: bad latency");
}

void DelayLine::push(const Command& cmd, double send_time) {
  if (!cmd.valid()) throw std::invalid_argument("delay line: invalid command");
  Command stamped = cmd;
  stamped.set_time(send_time);
  queue_.emplace_back(send_time + latency_, stamped);
}

std::optional<Command> DelayLine::pop(double now) {
  if (queue_.empty() || queue_.front().first > now + kTimeEps) return std::nullopt;
  Command cmd = queue_.front().second;
  queue_.pop_front();
  held_ = cmd;
  return cmd;
}

const std::optional<Command>& DelayLine::held(double now) {
  while (auto cmd = pop(now)) {
  }
  return held_;
}

void DelayLine::clear() {
  queue_.clear();
  held_.reset();
}

Vec4 lowlevel_sim(const Command& cmd, const QuadState& state,
                  const QuadrotorModel& model, const Vec3& rate_gain) {
  Vec4 f_des;
  if (cmd.mode() == CommandMode::kSingleRotorThrusts) {
    f_des = cmd.thrusts();
    for (int i = 0; i < 4; ++i)
      f_des(i) = std::clamp(f_des(i), model.f_min, model.f_max);
  } else {
    // P loop on bodyrate: desired angular acceleration -> torque -> thrusts.
    const Vec3 alpha = rate_gain.cwiseProduct(cmd.bodyrate() - state.w);
    const Mat3 inertia = model.inertia_matrix();
    const Vec3 tau = inertia * alpha + state.w.cross(inertia * state.w);
    f_des = allocate_inverse(cmd.collective_thrust(), tau, model);
  }

  Vec4 targets;
  const double lo = model.min_motor_speed();
  const double hi = model.max_motor_speed();
  for (int i = 0; i < 4; ++i) {
    const double w = std::sqrt(std::max(f_des(i), 0.0) / model.c_f);
    targets(i) = std::clamp(w, lo, hi);
  }
  return targets;
}

Vec4 motor_step(const Vec4& speeds, const Vec4& targets, double motor_tc,
                double dt) {
  const double alpha = 1.0 - std::exp(-dt / motor_tc);
  return speeds + alpha * (targets - speeds);
}

Wrench aero_quadratic(const Vec4& speeds, const QuadState& state,
                      const QuadrotorModel& model) {
  const Vec4 f = model.c_f * speeds.cwiseProduct(speeds);
  auto [collective, torque] = allocate(f, model);
  Wrench w;
  w.force = Vec3(0.0, 0.0, collective);
  w.torque = torque;
  if (!model.drag_coeffs.isZero()) {
    const Vec3 v_body = state.q.conjugate() * state.v;
    w.force -= model.drag_coeffs.cwiseProduct(v_body);
  }
  return w;
}

namespace {

struct StateDeriv {
  Vec3 dp;
  Vec4 dq;  // quaternion coefficient rates, (w,x,y,z) order
  Vec3 dv;
  Vec3 dw;
};

Vec4 quat_deriv(const Quat& q, const Vec3& w) {
  // 0.5 * q (x) (0, w), written out on coefficients.
  return 0.5 * Vec4(-q.x() * w.x() - q.y() * w.y() - q.z() * w.z(),
                    q.w() * w.x() + q.y() * w.z() - q.z() * w.y(),
                    q.w() * w.y() + q.z() * w.x() - q.x() * w.z(),
                    q.w() * w.z() + q.x() * w.y() - q.y() * w.x());
}

StateDeriv dynamics(const Vec3& v, const Quat& q, const Vec3& w,
                    const Wrench& wrench, const QuadrotorModel& model) {
  StateDeriv d;
  d.dp = v;
  d.dq = quat_deriv(q, w);
  d.dv = q.normalized() * (wrench.force / model.mass) + model.gravity_world();
  const Mat3 inertia = model.inertia_matrix();
  d.dw = inertia.inverse() * (wrench.torque - w.cross(inertia * w));
  return d;
}

Quat quat_add(const Quat& q, const Vec4& dq, double scale) {
  return Quat(q.w() + scale * dq(0), q.x() + scale * dq(1),
              q.y() + scale * dq(2), q.z() + scale * dq(3));
}

}  // namespace

QuadState rigid_body_step(const QuadState& state, const Wrench& wrench,
                          const QuadrotorModel& model, double dt,
                          IntegratorKind kind) {
  QuadState out = state;

  switch (kind) {
    case IntegratorKind::kRk4: {
      const StateDeriv k1 = dynamics(state.v, state.q, state.w, wrench, model);
      const Vec3 v2 = state.v + 0.5 * dt * k1.dv;
      const Quat q2 = quat_add(state.q, k1.dq, 0.5 * dt);
      const Vec3 w2 = state.w + 0.5 * dt * k1.dw;
      const StateDeriv k2 = dynamics(v2, q2, w2, wrench, model);
      const Vec3 v3 = state.v + 0.5 * dt * k2.dv;
      const Quat q3 = quat_add(state.q, k2.dq, 0.5 * dt);
      const Vec3 w3 = state.w + 0.5 * dt * k2.dw;
      const StateDeriv k3 = dynamics(v3, q3, w3, wrench, model);
      const Vec3 v4 = state.v + dt * k3.dv;
      const Quat q4 = quat_add(state.q, k3.dq, dt);
      const Vec3 w4 = state.w + dt * k3.dw;
      const StateDeriv k4 = dynamics(v4, q4, w4, wrench, model);

      out.p = state.p + dt / 6.0 * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp);
      out.v = state.v + dt / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
      out.w = state.w + dt / 6.0 * (k1.dw + 2.0 * k2.dw + 2.0 * k3.dw + k4.dw);
      const Vec4 dq = (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq) / 6.0;
      out.q = quat_add(state.q, dq, dt);
      break;
    }
    case IntegratorKind::kExplicitEuler: {
      const StateDeriv k = dynamics(state.v, state.q, state.w, wrench, model);
      out.p = state.p + dt * k.dp;
      out.v = state.v + dt * k.dv;
      out.w = state.w + dt * k.dw;
      out.q = quat_add(state.q, k.dq, dt);
      break;
    }
    case IntegratorKind::kSymplecticEuler: {
      const StateDeriv k = dynamics(state.v, state.q, state.w, wrench, model);
      out.v = state.v + dt * k.dv;
      out.w = state.w + dt * k.dw;
      out.p = state.p + dt * out.v;
      out.q = quaternion_integrate(state.q, out.w, dt);
      break;
    }
  }

  out.q.normalize();
  out.t = state.t + dt;

  // Derivatives at the new state, for logging and downstream consumers.
  const StateDeriv dn = dynamics(out.v, out.q, out.w, wrench, model);
  out.a = dn.dv;
  out.wd = dn.dw;
  return out;
}

Simulator::Simulator(const QuadrotorModel& model, const SimParams& params)
    : model_(model),
      params_(params),
      delay_(params.command_latency),
      rng_(params.seed) {
  model_.validate();
  if (!(params_.dt > 0.0)) throw ConfigError("sim: dt must be positive");
  if (params_.state_latency < 0.0) throw ConfigError("sim: negative state latency");
  idle_ = params_.idle.value_or(
      Command::single_rotor(0.0, model_.hover_rotor_thrusts()));
  history_len_ = size_t(std::ceil(params_.state_latency / params_.dt)) + 1;
  reset(QuadState{});
}

void Simulator::reset(const QuadState& initial) {
  state_.quad = initial;
  state_.quad.normalize();
  state_.sim_time = initial.t;
  t0_ = initial.t;
  steps_ = 0;
  Vec4 f = initial.f;
  if (f.isZero()) f = model_.hover_rotor_thrusts();
  for (int i = 0; i < 4; ++i)
    state_.motor_speeds(i) = std::sqrt(std::max(f(i), 0.0) / model_.c_f);
  state_.quad.f = model_.c_f * state_.motor_speeds.cwiseProduct(state_.motor_speeds);
  delay_.clear();
  history_.clear();
  history_.push_back(state_.quad);
  imu_buffer_.clear();
  imu_count_ = 0;
  gyro_bias_.setZero();
  accel_bias_.setZero();
}

void Simulator::push_command(const Command& cmd) {
  delay_.push(cmd, state_.sim_time);
}

void Simulator::step() {
  const auto& active = delay_.held(state_.sim_time);
  const Command& cmd = active ? *active : idle_;

  const Vec4 targets = lowlevel_sim(cmd, state_.quad, model_, params_.rate_gain);
  state_.motor_speeds =
      motor_step(state_.motor_speeds, targets, model_.motor_tc, params_.dt);

  Wrench wrench = aero_quadratic(state_.motor_speeds, state_.quad, model_);
  wrench.force += params_.disturbance_force;
  wrench.torque += params_.disturbance_torque;

  state_.quad = rigid_body_step(state_.quad, wrench, model_, params_.dt,
                                params_.integrator);

  state_.quad.f = model_.c_f * state_.motor_speeds.cwiseProduct(state_.motor_speeds);
  state_.quad.fd = model_.c_f * targets.cwiseProduct(targets);

  ++steps_;
  state_.sim_time = t0_ + steps_ * params_.dt;
  state_.quad.t = state_.sim_time;

  if (!state_.quad.valid())
    throw NumericalError("sim: state diverged at step " + std::to_string(steps_));

  history_.push_back(state_.quad);
  while (history_.size() > history_len_ + 1) history_.pop_front();

  maybe_sample_imu();
}

QuadState Simulator::feedback_state() const {
  if (params_.state_latency <= 0.0 || history_.empty()) return state_.quad;
  const double want = state_.sim_time - params_.state_latency;
  const QuadState* best = &history_.front();
  for (const auto& st : history_) {
    if (st.t <= want + kTimeEps) best = &st;
    else break;
  }
  return *best;
}

void Simulator::maybe_sample_imu() {
  if (params_.imu.rate <= 0.0) return;
  const double period = 1.0 / params_.imu.rate;
  while ((imu_count_ + 1) * period <= state_.sim_time - t0_ + kTimeEps) {
    ++imu_count_;
    gyro_bias_ += params_.imu.gyro_walk *
                  Vec3(gauss_(rng_), gauss_(rng_), gauss_(rng_));
    accel_bias_ += params_.imu.accel_walk *
                   Vec3(gauss_(rng_), gauss_(rng_), gauss_(rng_));
    ImuSample s;
    s.t = t0_ + imu_count_ * period;
    // Specific force: everything but gravity, expressed in body axes.
    const Vec3 a_spec = state_.quad.q.conjugate() *
                        (state_.quad.a - model_.gravity_world());
    s.gyro = state_.quad.w + gyro_bias_ +
             params_.imu.gyro_std * Vec3(gauss_(rng_), gauss_(rng_), gauss_(rng_));
    s.accel = a_spec + accel_bias_ +
              params_.imu.accel_std * Vec3(gauss_(rng_), gauss_(rng_), gauss_(rng_));
    imu_buffer_.push_back(s);
  }
}

std::vector<ImuSample> Simulator::drain_imu() {
  std::vector<ImuSample> out;
  out.swap(imu_buffer_);
  return out;
}

}  // namespace quadstack
