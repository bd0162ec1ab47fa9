#include "quadstack/sampler.hpp"

#include <algorithm>
#include <stdexcept>

namespace quadstack {

Setpoint trajectory_interpolate(const SampledTrajectory& traj, double t) {
  const auto& sp = traj.setpoints;
  if (sp.size() < 2) throw std::invalid_argument("interpolate: trajectory too short");

  if (t <= sp.front().state.t) {
    Setpoint out = sp.front();
    out.state.t = t;
    out.input.set_time(t);
    return out;
  }
  if (t >= sp.back().state.t) {
    Setpoint out = sp.back();
    out.state.t = t;
    out.input.set_time(t);
    return out;
  }

  const auto it = std::lower_bound(
      sp.begin(), sp.end(), t,
      [](const Setpoint& s, double val) { return s.state.t < val; });
  const Setpoint& hi = *it;
  const Setpoint& lo = *(it - 1);
  const double u = (t - lo.state.t) / (hi.state.t - lo.state.t);

  Setpoint out;
  QuadState& st = out.state;
  const QuadState& A = lo.state;
  const QuadState& B = hi.state;
  st.t = t;
  st.p = (1.0 - u) * A.p + u * B.p;
  st.q = A.q.slerp(u, B.q);
  st.v = (1.0 - u) * A.v + u * B.v;
  st.w = (1.0 - u) * A.w + u * B.w;
  st.a = (1.0 - u) * A.a + u * B.a;
  st.wd = (1.0 - u) * A.wd + u * B.wd;
  st.j = (1.0 - u) * A.j + u * B.j;
  st.s = (1.0 - u) * A.s + u * B.s;
  st.fd = (1.0 - u) * A.fd + u * B.fd;
  st.f = st.fd;

  if (lo.input.mode() == CommandMode::kSingleRotorThrusts &&
      hi.input.mode() == CommandMode::kSingleRotorThrusts) {
    out.input = Command::single_rotor(
        t, (1.0 - u) * lo.input.thrusts() + u * hi.input.thrusts());
  } else {
    out.input = (u < 0.5) ? lo.input : hi.input;
    out.input.set_time(t);
  }
  return out;
}

std::vector<Setpoint> sample_time_based(const SampledTrajectory& traj, double t,
                                        int n, double dt_h) {
  if (n < 1) throw std::invalid_argument("sampler: horizon must be >= 1");
  if (!(dt_h > 0.0)) throw std::invalid_argument("sampler: dt must be positive");
  std::vector<Setpoint> out;
  out.reserve(size_t(n));
  for (int k = 0; k < n; ++k)
    out.push_back(trajectory_interpolate(traj, t + k * dt_h));
  return out;
}

std::pair<std::vector<Setpoint>, double> sample_position_based(
    const SampledTrajectory& traj, const Vec3& position, double prev_progress,
    int n, double dt_h, double window) {
  if (!(window > 0.0)) throw std::invalid_argument("sampler: window must be positive");
  const auto& sp = traj.setpoints;

  const double lo_t = std::max(prev_progress, sp.front().state.t);
  const double hi_t = lo_t + window;

  auto first = std::lower_bound(
      sp.begin(), sp.end(), lo_t,
      [](const Setpoint& s, double val) { return s.state.t < val; });
  if (first == sp.end()) --first;  // past the end: only the last sample

  double best_t = first->state.t;
  double best_d = (first->state.p - position).squaredNorm();
  for (auto it = first + 1; it != sp.end() && it->state.t <= hi_t; ++it) {
    const double d = (it->state.p - position).squaredNorm();
    if (d < best_d) {  // strict: earliest minimizer wins ties
      best_d = d;
      best_t = it->state.t;
    }
  }

  const double progress = std::max(prev_progress, best_t);
  return {sample_time_based(traj, progress, n, dt_h), progress};
}

}  // namespace quadstack
