#include "quadstack/controller_mpc.hpp"

#include <Eigen/Cholesky>

#include "quadstack/errors.hpp"
#include "quadstack/quaternion.hpp"

namespace quadstack {

void MpcParams::validate() const {
  if (horizon < 5) throw ConfigError("mpc: horizon must be >= 5");
  if (!(dt > 0.0)) throw ConfigError("mpc: dt must be positive");
  if (w_p < 0 || w_att < 0 || w_v < 0 || w_w < 0 || w_u < 0)
    throw ConfigError("mpc: negative weight");
  if (w_p + w_att + w_v + w_w <= 0.0)
    throw ConfigError("mpc: at least one state weight must be positive");
  if (max_iters < 1) throw ConfigError("mpc: max_iters must be >= 1");
  if (!(tol > 0.0)) throw ConfigError("mpc: tol must be positive");
}

namespace {

// Rotation of b by q written homogeneously in the quaternion components,
// so the analytic Jacobian below matches the evaluated value exactly.
Vec3 rotate_h(const Quat& q, const Vec3& b) {
  const Vec3 u = q.vec();
  return (q.w() * q.w() - u.squaredNorm()) * b + 2.0 * u.dot(b) * u +
         2.0 * q.w() * u.cross(b);
}

// d(rotate_h(q, b))/dq, columns ordered (w, x, y, z).
Eigen::Matrix<double, 3, 4> rotate_h_jacobian(const Quat& q, const Vec3& b) {
  const Vec3 u = q.vec();
  Eigen::Matrix<double, 3, 4> j;
  j.col(0) = 2.0 * q.w() * b + 2.0 * u.cross(b);
  j.block<3, 3>(0, 1) = -2.0 * b * u.transpose() + 2.0 * u * b.transpose() +
                        2.0 * u.dot(b) * Mat3::Identity() -
                        2.0 * q.w() * skew(b);
  return j;
}

// Left-multiplication matrix: L(a) b = a (x) b on (w,x,y,z) coefficients.
Mat4 quat_left(const Quat& a) {
  Mat4 l;
  l << a.w(), -a.x(), -a.y(), -a.z(),
       a.x(), a.w(), -a.z(), a.y(),
       a.y(), a.z(), a.w(), -a.x(),
       a.z(), -a.y(), a.x(), a.w();
  return l;
}

struct CostExpansion {
  Eigen::Matrix<double, 13, 1> lx = Eigen::Matrix<double, 13, 1>::Zero();
  Eigen::Matrix<double, 13, 13> lxx = Eigen::Matrix<double, 13, 13>::Zero();
};

}  // namespace

MpcController::MpcController(const QuadrotorModel& model, const MpcParams& params)
    : model_(model), params_(params) {
  model_.validate();
  params_.validate();
  inertia_inv_ = model_.inertia_matrix().inverse();
  torque_map_ = model_.allocation_matrix().bottomRows<3>();
  u_hover_ = model_.hover_rotor_thrusts();
}

void MpcController::reset() {
  warm_ = false;
  u_prev_.clear();
  shift_accum_ = 0.0;
}

void MpcController::dynamics(const StateVec& x, const Vec4& u, StateVec* dx,
                             MatA* jx, MatB* ju) const {
  const Vec3 v = x.segment<3>(7);
  const Quat q(x(3), x(4), x(5), x(6));
  const Vec3 w = x.segment<3>(10);
  const double thrust = u.sum();
  const Vec3 body_acc(0.0, 0.0, thrust / model_.mass);
  const Mat3 inertia = model_.inertia_matrix();

  dx->segment<3>(0) = v;
  // qdot = 0.5 q (x) (0, w)
  (*dx)(3) = 0.5 * (-q.x() * w.x() - q.y() * w.y() - q.z() * w.z());
  (*dx)(4) = 0.5 * (q.w() * w.x() + q.y() * w.z() - q.z() * w.y());
  (*dx)(5) = 0.5 * (q.w() * w.y() + q.z() * w.x() - q.x() * w.z());
  (*dx)(6) = 0.5 * (q.w() * w.z() + q.x() * w.y() - q.y() * w.x());
  dx->segment<3>(7) = rotate_h(q, body_acc) + model_.gravity_world();
  dx->segment<3>(10) = inertia_inv_ * (torque_map_ * u - w.cross(inertia * w));

  if (!jx) return;
  jx->setZero();
  ju->setZero();

  jx->block<3, 3>(0, 7) = Mat3::Identity();

  // d qdot / dq
  Mat4 mq;
  mq << 0.0, -w.x(), -w.y(), -w.z(),
        w.x(), 0.0, w.z(), -w.y(),
        w.y(), -w.z(), 0.0, w.x(),
        w.z(), w.y(), -w.x(), 0.0;
  jx->block<4, 4>(3, 3) = 0.5 * mq;
  // d qdot / dw
  Eigen::Matrix<double, 4, 3> nq;
  nq << -q.x(), -q.y(), -q.z(),
        q.w(), -q.z(), q.y(),
        q.z(), q.w(), -q.x(),
        -q.y(), q.x(), q.w();
  jx->block<4, 3>(3, 10) = 0.5 * nq;

  jx->block<3, 4>(7, 3) = rotate_h_jacobian(q, body_acc);
  jx->block<3, 3>(10, 10) =
      inertia_inv_ * (-skew(w) * inertia + skew(inertia * w));

  const Vec3 dthrust = rotate_h(q, Vec3(0.0, 0.0, 1.0 / model_.mass));
  for (int i = 0; i < 4; ++i) ju->col(i).segment<3>(7) = dthrust;
  ju->block<3, 4>(10, 0) = inertia_inv_ * torque_map_;
}

void MpcController::step(const StateVec& x, const Vec4& u, StateVec* x_next,
                         MatA* a, MatB* b) const {
  const double h = params_.dt;
  StateVec k1, k2, k3, k4;
  if (!a) {
    dynamics(x, u, &k1, nullptr, nullptr);
    dynamics(x + 0.5 * h * k1, u, &k2, nullptr, nullptr);
    dynamics(x + 0.5 * h * k2, u, &k3, nullptr, nullptr);
    dynamics(x + h * k3, u, &k4, nullptr, nullptr);
    *x_next = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    return;
  }

  MatA a1, a2, a3, a4;
  MatB b1, b2, b3, b4;
  dynamics(x, u, &k1, &a1, &b1);
  dynamics(x + 0.5 * h * k1, u, &k2, &a2, &b2);
  dynamics(x + 0.5 * h * k2, u, &k3, &a3, &b3);
  dynamics(x + h * k3, u, &k4, &a4, &b4);
  *x_next = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

  // Chain rule through the stages.
  const MatA dk1 = a1;
  const MatB dk1u = b1;
  const MatA dk2 = a2 * (MatA::Identity() + 0.5 * h * dk1);
  const MatB dk2u = a2 * (0.5 * h * dk1u) + b2;
  const MatA dk3 = a3 * (MatA::Identity() + 0.5 * h * dk2);
  const MatB dk3u = a3 * (0.5 * h * dk2u) + b3;
  const MatA dk4 = a4 * (MatA::Identity() + h * dk3);
  const MatB dk4u = a4 * (h * dk3u) + b4;
  *a = MatA::Identity() + h / 6.0 * (dk1 + 2.0 * dk2 + 2.0 * dk3 + dk4);
  *b = h / 6.0 * (dk1u + 2.0 * dk2u + 2.0 * dk3u + dk4u);
}

double MpcController::total_cost(const std::vector<StateVec>& xs,
                                 const std::vector<Vec4>& us,
                                 const std::vector<Setpoint>& refs) const {
  const int n = params_.horizon;
  double j = 0.0;
  for (int k = 0; k <= n; ++k) {
    const auto& ref = refs[size_t(std::min(k, n - 1))].state;
    const StateVec& x = xs[size_t(k)];
    const Vec3 dp = x.segment<3>(0) - ref.p;
    const Vec3 dv = x.segment<3>(7) - ref.v;
    const Vec3 dw = x.segment<3>(10) - ref.w;
    const Quat q(x(3), x(4), x(5), x(6));
    Quat dq = ref.q.conjugate() * q;
    if (dq.w() < 0.0) dq.coeffs() *= -1.0;
    const Vec3 e_att = 2.0 * dq.vec();
    j += params_.w_p * dp.squaredNorm() + params_.w_v * dv.squaredNorm() +
         params_.w_w * dw.squaredNorm() + params_.w_att * e_att.squaredNorm();
    if (k < n) {
      const Vec4 du = us[size_t(k)] - u_hover_;
      j += params_.w_u * du.squaredNorm();
    }
  }
  return j;
}

Command MpcController::control(const QuadState& state,
                               const std::vector<Setpoint>& refs,
                               std::vector<QuadState>* predicted) {
  if (!state.p.allFinite() || !state.q.coeffs().allFinite() ||
      !state.v.allFinite() || !state.w.allFinite())
    throw std::invalid_argument("mpc: non-finite state");
  const int n = params_.horizon;
  if (int(refs.size()) != n)
    throw std::invalid_argument("mpc: need exactly horizon setpoints");

  StateVec x0;
  Quat q0 = state.q.normalized();
  x0.segment<3>(0) = state.p;
  x0(3) = q0.w();
  x0(4) = q0.x();
  x0(5) = q0.y();
  x0(6) = q0.z();
  x0.segment<3>(7) = state.v;
  x0.segment<3>(10) = state.w;

  const size_t nn = size_t(n);

  // Warm start: shift the previous input sequence by the number of horizon
  // nodes that elapsed since the last solve.
  std::vector<Vec4> us(nn, u_hover_);
  if (warm_ && int(u_prev_.size()) == n) {
    shift_accum_ += (state.t - last_t_) / params_.dt;
    int shift = std::max(0, int(std::floor(shift_accum_ + 1e-9)));
    shift = std::min(shift, n);
    shift_accum_ -= shift;
    for (int k = 0; k < n; ++k)
      us[size_t(k)] = u_prev_[size_t(std::min(k + shift, n - 1))];
  }
  last_t_ = state.t;
  for (auto& u : us)
    for (int i = 0; i < 4; ++i) u(i) = std::clamp(u(i), model_.f_min, model_.f_max);

  std::vector<StateVec> xs(nn + 1);
  xs[0] = x0;
  for (int k = 0; k < n; ++k) step(xs[size_t(k)], us[size_t(k)], &xs[size_t(k) + 1], nullptr, nullptr);
  double cost = total_cost(xs, us, refs);

  std::vector<MatA> as(nn);
  std::vector<MatB> bs(nn);
  std::vector<Eigen::Matrix<double, NU, NX>> gains(nn);
  std::vector<Vec4> ffs(nn);

  stats_ = MpcStats{};
  bool stalled = false;

  for (int iter = 0; iter < params_.max_iters && !stalled; ++iter) {
    ++stats_.iterations;

    // Linearize the rollout and expand the cost.
    std::vector<CostExpansion> cx(nn + 1);
    std::vector<Vec4> lu(nn);
    for (int k = 0; k < n; ++k) {
      StateVec dummy;
      step(xs[size_t(k)], us[size_t(k)], &dummy, &as[size_t(k)], &bs[size_t(k)]);
      lu[size_t(k)] = 2.0 * params_.w_u * (us[size_t(k)] - u_hover_);
    }
    for (int k = 0; k <= n; ++k) {
      const auto& ref = refs[size_t(std::min(k, n - 1))].state;
      const StateVec& x = xs[size_t(k)];
      CostExpansion& e = cx[size_t(k)];
      e.lx.segment<3>(0) = 2.0 * params_.w_p * (x.segment<3>(0) - ref.p);
      e.lxx.block<3, 3>(0, 0) = 2.0 * params_.w_p * Mat3::Identity();
      e.lx.segment<3>(7) = 2.0 * params_.w_v * (x.segment<3>(7) - ref.v);
      e.lxx.block<3, 3>(7, 7) = 2.0 * params_.w_v * Mat3::Identity();
      e.lx.segment<3>(10) = 2.0 * params_.w_w * (x.segment<3>(10) - ref.w);
      e.lxx.block<3, 3>(10, 10) = 2.0 * params_.w_w * Mat3::Identity();

      const Quat q(x(3), x(4), x(5), x(6));
      Quat dq = ref.q.conjugate() * q;
      double sign = 1.0;
      if (dq.w() < 0.0) {
        dq.coeffs() *= -1.0;
        sign = -1.0;
      }
      const Vec3 e_att = 2.0 * dq.vec();
      const Eigen::Matrix<double, 3, 4> je =
          2.0 * sign * quat_left(ref.q.conjugate()).bottomRows<3>();
      e.lx.segment<4>(3) = 2.0 * params_.w_att * je.transpose() * e_att;
      e.lxx.block<4, 4>(3, 3) = 2.0 * params_.w_att * je.transpose() * je;
    }

    // Riccati backward pass.
    Eigen::Matrix<double, NX, 1> vx = cx[size_t(n)].lx;
    MatA vxx = cx[size_t(n)].lxx;
    for (int k = n - 1; k >= 0; --k) {
      const MatA& a = as[size_t(k)];
      const MatB& b = bs[size_t(k)];
      const Eigen::Matrix<double, NX, 1> qx = cx[size_t(k)].lx + a.transpose() * vx;
      const Vec4 qu = lu[size_t(k)] + b.transpose() * vx;
      const MatA qxx = cx[size_t(k)].lxx + a.transpose() * vxx * a;
      Mat4 quu = 2.0 * params_.w_u * Mat4::Identity() +
                 b.transpose() * vxx * b + params_.ridge * Mat4::Identity();
      const Eigen::Matrix<double, NU, NX> qux = b.transpose() * vxx * a;

      const Eigen::LLT<Mat4> llt(quu);
      gains[size_t(k)] = -llt.solve(qux);
      ffs[size_t(k)] = -llt.solve(qu);

      const auto& kmat = gains[size_t(k)];
      const auto& kff = ffs[size_t(k)];
      vx = qx + kmat.transpose() * quu * kff + kmat.transpose() * qu +
           qux.transpose() * kff;
      vxx = qxx + kmat.transpose() * quu * kmat + kmat.transpose() * qux +
            qux.transpose() * kmat;
      vxx = 0.5 * (vxx + vxx.transpose()).eval();
    }

    // Line-searched forward pass with clamped inputs.
    bool accepted = false;
    for (double alpha : {1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125}) {
      std::vector<StateVec> xs_try(nn + 1);
      std::vector<Vec4> us_try(nn);
      xs_try[0] = x0;
      for (int k = 0; k < n; ++k) {
        Vec4 u = us[size_t(k)] + alpha * ffs[size_t(k)] +
                 gains[size_t(k)] * (xs_try[size_t(k)] - xs[size_t(k)]);
        for (int i = 0; i < 4; ++i)
          u(i) = std::clamp(u(i), model_.f_min, model_.f_max);
        us_try[size_t(k)] = u;
        step(xs_try[size_t(k)], u, &xs_try[size_t(k) + 1], nullptr, nullptr);
      }
      const double cost_try = total_cost(xs_try, us_try, refs);
      if (cost_try < cost) {
        const double decrease = cost - cost_try;
        xs = std::move(xs_try);
        us = std::move(us_try);
        cost = cost_try;
        accepted = true;
        if (decrease < params_.tol) stalled = true;  // converged
        break;
      }
    }
    if (!accepted) {
      // No descent. At a (clamped) stationary point this is convergence;
      // otherwise flag it.
      double ff_max = 0.0;
      for (const auto& kff : ffs) ff_max = std::max(ff_max, kff.cwiseAbs().maxCoeff());
      if (ff_max > 1e-6) stats_.warned = true;
      stalled = true;
    }
  }

  if (!stalled && stats_.iterations >= params_.max_iters) {
    stats_.converged = false;
    stats_.warned = true;
  }
  stats_.cost = cost;

  warm_ = true;
  u_prev_ = us;

  if (predicted) {
    predicted->clear();
    predicted->reserve(size_t(n + 1));
    for (int k = 0; k <= n; ++k) {
      const StateVec& x = xs[size_t(k)];
      QuadState st;
      st.t = state.t + k * params_.dt;
      st.p = x.segment<3>(0);
      st.q = Quat(x(3), x(4), x(5), x(6)).normalized();
      st.v = x.segment<3>(7);
      st.w = x.segment<3>(10);
      if (k < n) st.fd = us[size_t(k)];
      predicted->push_back(st);
    }
  }

  return Command::single_rotor(state.t, us[0]);
}

}  // namespace quadstack
