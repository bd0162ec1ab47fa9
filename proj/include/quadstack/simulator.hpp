#pragma once

#include <deque>
#include <optional>
#include <random>
#include <vector>

#include "quadstack/model.hpp"
#include "quadstack/types.hpp"

namespace quadstack {

enum class IntegratorKind { kRk4, kExplicitEuler, kSymplecticEuler };

struct SimState {
  QuadState quad;
  Vec4 motor_speeds{Vec4::Zero()};  // [rad/s]
  double sim_time{0.0};
};

// FIFO of commands released after a fixed transport latency. Zero-order hold:
// the last released command stays active until the next one is released.
class DelayLine {
 public:
  explicit DelayLine(double latency);

  void push(const Command& cmd, double send_time);
  // Pops the next command whose release time has passed, oldest first.
  std::optional<Command> pop(double now);
  // Drains everything released by `now` and returns the latest (ZOH view).
  // Empty until the first command is released.
  const std::optional<Command>& held(double now);
  double latency() const { return latency_; }
  void clear();

 private:
  double latency_;
  std::deque<std::pair<double, Command>> queue_;  // (release_time, cmd)
  std::optional<Command> held_;
};

struct ImuNoiseParams {
  double rate{500.0};       // [Hz]
  double gyro_std{0.0};     // white noise sigma per sample
  double accel_std{0.0};
  double gyro_walk{0.0};    // bias random-walk sigma per sample
  double accel_walk{0.0};
};

struct SimParams {
  double dt{1e-3};
  IntegratorKind integrator{IntegratorKind::kRk4};
  Vec3 rate_gain{20.0, 20.0, 8.0};      // onboard bodyrate P loop
  double command_latency{0.0};          // [s]
  double state_latency{0.0};            // feedback path [s]
  std::optional<Command> idle;          // applied before the first release
  Vec3 disturbance_force{Vec3::Zero()};   // body frame [N]
  Vec3 disturbance_torque{Vec3::Zero()};  // body frame [N m]
  ImuNoiseParams imu;
  uint64_t seed{0};
};

// Low-level command -> motor speed targets [rad/s], clamped to the rotor
// envelope. Bodyrate commands close a P loop on the measured rate.
Vec4 lowlevel_sim(const Command& cmd, const QuadState& state,
                  const QuadrotorModel& model, const Vec3& rate_gain);

// First-order motor response, exact discretization:
// speeds + (1 - exp(-dt/tc)) (targets - speeds).
Vec4 motor_step(const Vec4& speeds, const Vec4& targets, double motor_tc,
                double dt);

// Quadratic rotor aerodynamics: f_i = c_f w_i^2, plus optional linear body
// drag. Returns the body-frame wrench.
Wrench aero_quadratic(const Vec4& speeds, const QuadState& state,
                      const QuadrotorModel& model);

// Swappable aero model hook; aero_quadratic is the default. A blade-element
// style model would slot in here with access to airspeed via the state.
class AeroModel {
 public:
  virtual ~AeroModel() = default;
  virtual Wrench wrench(const Vec4& speeds, const QuadState& state,
                        const QuadrotorModel& model) const = 0;
};

class QuadraticAero : public AeroModel {
 public:
  Wrench wrench(const Vec4& speeds, const QuadState& state,
                const QuadrotorModel& model) const override {
    return aero_quadratic(speeds, state, model);
  }
};

// One integration step of the rigid-body ODE under a constant body wrench.
// The quaternion is renormalized and the returned state's a/wd are the
// derivatives evaluated at the new state.
QuadState rigid_body_step(const QuadState& state, const Wrench& wrench,
                          const QuadrotorModel& model, double dt,
                          IntegratorKind kind);

// Fixed-step simulator: command delay line -> low-level -> motors -> aero ->
// rigid body, in that order, once per step.
class Simulator {
 public:
  Simulator(const QuadrotorModel& model, const SimParams& params);

  // Resets to the given state; motor speeds are chosen to already produce
  // state.f (or hover thrust if f is zero).
  void reset(const QuadState& initial);

  void push_command(const Command& cmd);  // stamped with current sim_time
  void step();

  const SimState& state() const { return state_; }
  double sim_time() const { return state_.sim_time; }
  const QuadrotorModel& model() const { return model_; }

  // State as seen by the estimator input, delayed by params.state_latency.
  QuadState feedback_state() const;

  // IMU samples generated since the last call (empty when disabled).
  std::vector<ImuSample> drain_imu();

 private:
  void maybe_sample_imu();

  QuadrotorModel model_;
  SimParams params_;
  SimState state_;
  DelayLine delay_;
  Command idle_;
  long steps_{0};
  double t0_{0.0};

  std::deque<QuadState> history_;  // for state_latency
  size_t history_len_{0};

  std::mt19937_64 rng_;
  std::normal_distribution<double> gauss_{0.0, 1.0};
  Vec3 gyro_bias_{Vec3::Zero()};
  Vec3 accel_bias_{Vec3::Zero()};
  long imu_count_{0};
  std::vector<ImuSample> imu_buffer_;
};

}  // namespace quadstack
