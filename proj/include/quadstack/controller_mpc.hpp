#pragma once

#include <vector>

#include "quadstack/model.hpp"
#include "quadstack/types.hpp"

namespace quadstack {

struct MpcParams {
  int horizon{20};        // shooting intervals
  double dt{0.05};        // node spacing [s]
  double w_p{100.0};
  double w_att{5.0};
  double w_v{10.0};
  double w_w{1.0};
  double w_u{0.1};        // deviation from hover thrust
  int max_iters{5};
  double tol{1e-6};       // cost decrease threshold
  double ridge{1e-9};     // Quu regularization

  void validate() const;  // throws ConfigError
};

struct MpcStats {
  int iterations{0};
  bool converged{true};
  bool warned{false};     // hit iteration cap or line search stalled
  double cost{0.0};
};

// Receding-horizon tracker on single-rotor thrusts. Sequential
// linear-quadratic iterations: linearize the RK4-discretized rigid-body
// dynamics around a rollout, Riccati backward pass, line-searched forward
// pass with per-component input clamping, warm started from the previous
// solution shifted along the horizon.
class MpcController {
 public:
  MpcController(const QuadrotorModel& model, const MpcParams& params);

  // refs must contain exactly `horizon` setpoints spaced params.dt apart.
  // Throws std::invalid_argument on a non-finite state or wrong-sized refs.
  Command control(const QuadState& state, const std::vector<Setpoint>& refs,
                  std::vector<QuadState>* predicted = nullptr);

  const MpcStats& stats() const { return stats_; }
  void reset();

 private:
  static constexpr int NX = 13;  // p, q, v, w
  static constexpr int NU = 4;
  using StateVec = Eigen::Matrix<double, NX, 1>;
  using MatA = Eigen::Matrix<double, NX, NX>;
  using MatB = Eigen::Matrix<double, NX, NU>;

  void dynamics(const StateVec& x, const Vec4& u, StateVec* dx, MatA* jx,
                MatB* ju) const;
  void step(const StateVec& x, const Vec4& u, StateVec* x_next, MatA* a,
            MatB* b) const;
  double total_cost(const std::vector<StateVec>& xs,
                    const std::vector<Vec4>& us,
                    const std::vector<Setpoint>& refs) const;

  QuadrotorModel model_;
  MpcParams params_;
  Mat3 inertia_inv_;
  Eigen::Matrix<double, 3, 4> torque_map_;
  Vec4 u_hover_;
  MpcStats stats_;

  bool warm_{false};
  std::vector<Vec4> u_prev_;
  double last_t_{0.0};
  double shift_accum_{0.0};
};

}  // namespace quadstack
