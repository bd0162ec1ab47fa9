#pragma once

#include <memory>
#include <variant>

#include "quadstack/bridge.hpp"
#include "quadstack/guard.hpp"
#include "quadstack/pipeline_config.hpp"
#include "quadstack/references.hpp"
#include "quadstack/sampler.hpp"

namespace quadstack {

struct PilotStatus {
  bool degraded{false};          // estimator silent past the timeout
  bool backup_active{false};
  bool bridge_failed{false};
  bool feedthrough_active{false};
  int guard_switches{0};
  bool geometric_singular{false};
  bool indi_fallback{false};
  MpcStats mpc;                  // last solve
  long mpc_solves{0};
  long mpc_iterations_total{0};
  int mpc_iterations_max{0};
  long mpc_warnings{0};
  long commands_sent{0};
};

// Owns one control pipeline (estimator -> sampler -> controller -> bridge)
// plus a backup pipeline behind the safety guard. step() runs one control
// cycle and hands exactly one command to the bridge.
class Pilot {
 public:
  Pilot(const PilotConfig& config, const QuadrotorModel& model,
        std::shared_ptr<Bridge> bridge,
        std::shared_ptr<Bridge> backup_bridge = nullptr);

  // References (mutually exclusive; the latest call wins).
  void set_hover_reference(const HoverReference& ref);
  void set_trajectory(const SampledTrajectory& traj, double start_time);
  void set_velocity_reference(const VelocityReference& ref, const Vec3& p0,
                              double yaw0);
  void set_polynomial_reference(const PolynomialReference& ref);

  // External command feed-through (bypasses the controllers while fresh).
  void set_feedthrough(bool enabled);
  void feed_command(const Command& cmd);

  // Estimator inputs; routed to both main and backup estimators.
  void add_state_estimate(const QuadState& state);
  void add_imu(const ImuSample& imu);
  void add_pose(double t, const Vec3& p, const Quat& q);

  // One control cycle at time `now`. Returns the command that was handed to
  // the bridge.
  Command step(double now);

  const PilotStatus& status() const { return status_; }
  const std::vector<GuardEvent>& guard_events() const { return guard_.events(); }
  void reset_guard();
  double control_period() const { return 1.0 / config_.pipeline.control_rate; }
  const QuadrotorModel& model() const { return model_; }

 private:
  struct Modules {
    PipelineConfig config;
    std::unique_ptr<Estimator> estimator;
    std::unique_ptr<GeometricController> geometric;
    std::unique_ptr<MpcController> mpc;
    std::unique_ptr<IndiController> indi;
    std::unique_ptr<GyroDifferentiator> gyro_diff;
    double sampler_progress{0.0};
  };

  static Modules build_modules(const PipelineConfig& cfg,
                               const QuadrotorModel& model);
  std::vector<Setpoint> horizon(Modules& mod, const QuadState& est, double now,
                                int n, double dt_h);
  Command safety_hover(double now) const;
  Command run_pipeline(Modules& mod, const QuadState& est, double now);
  Command dispatch(const Command& cmd, double now);

  PilotConfig config_;
  QuadrotorModel model_;
  std::shared_ptr<Bridge> bridge_;
  std::shared_ptr<Bridge> backup_bridge_;

  Modules main_;
  Modules backup_;
  bool use_backup_{false};
  Guard guard_;

  // Active reference.
  std::variant<std::monostate, HoverReference, SampledTrajectory,
               VelocityReference, PolynomialReference>
      reference_;
  double traj_start_{0.0};
  Vec3 vel_ref_p0_{Vec3::Zero()};
  double vel_ref_yaw0_{0.0};

  bool feedthrough_enabled_{false};
  std::optional<Command> fed_command_;

  PilotStatus status_;
};

}  // namespace quadstack
