#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "quadstack/controller_mpc.hpp"
#include "quadstack/errors.hpp"

using namespace quadstack;

namespace {

std::vector<Setpoint> hover_refs(int n, const Vec3& p) {
  std::vector<Setpoint> refs(static_cast<size_t>(n));
  for (auto& sp : refs) sp.state.p = p;
  return refs;
}

QuadState state_at(const Vec3& p) {
  QuadState st;
  st.p = p;
  return st;
}

}  // namespace

TEST_CASE("hover is a fixed point: rotor thrusts stay at mg/4") {
  QuadrotorModel m;
  MpcController mpc(m, MpcParams{});
  const auto refs = hover_refs(20, Vec3(0.0, 0.0, 1.0));
  const Command cmd = mpc.control(state_at(Vec3(0.0, 0.0, 1.0)), refs);

  REQUIRE(cmd.mode() == CommandMode::kSingleRotorThrusts);
  const double hover = m.mass * m.g / 4.0;
  for (int i = 0; i < 4; ++i)
    CHECK(std::abs(cmd.thrusts()(i) - hover) < 1e-4);
  CHECK(mpc.stats().iterations <= 3);
  CHECK(mpc.stats().converged);
  CHECK(!mpc.stats().warned);
}

TEST_CASE("altitude error steers the collective the right way") {
  QuadrotorModel m;
  const auto refs = hover_refs(20, Vec3(0.0, 0.0, 1.0));
  const double mg = m.mass * m.g;

  MpcController climb(m, MpcParams{});
  const Command up = climb.control(state_at(Vec3(0.0, 0.0, 0.0)), refs);
  CHECK(up.thrusts().sum() > mg);

  MpcController sink(m, MpcParams{});
  const Command down = sink.control(state_at(Vec3(0.0, 0.0, 2.0)), refs);
  CHECK(down.thrusts().sum() < mg);
}

TEST_CASE("a 50 m climb pins every rotor to the upper bound exactly") {
  QuadrotorModel m;
  MpcController mpc(m, MpcParams{});
  const auto refs = hover_refs(20, Vec3(0.0, 0.0, 51.0));
  const Command cmd = mpc.control(state_at(Vec3(0.0, 0.0, 1.0)), refs);

  // the clamp writes the bound verbatim, so equality is exact
  for (int i = 0; i < 4; ++i) CHECK(cmd.thrusts()(i) == m.f_max);
}

TEST_CASE("a 50 m sideways step saturates the low side of the box") {
  QuadrotorModel m;
  MpcController mpc(m, MpcParams{});
  const auto refs = hover_refs(20, Vec3(50.0, 0.0, 1.0));
  const Command cmd = mpc.control(state_at(Vec3(0.0, 0.0, 1.0)), refs);

  double lo = 1e9, hi = -1e9;
  for (int i = 0; i < 4; ++i) {
    CHECK(cmd.thrusts()(i) >= m.f_min);
    CHECK(cmd.thrusts()(i) <= m.f_max);
    lo = std::min(lo, cmd.thrusts()(i));
    hi = std::max(hi, cmd.thrusts()(i));
  }
  // pitching hard means unloading one rotor pair completely
  CHECK(lo == m.f_min);
  CHECK(hi - lo > 3.0);
}

TEST_CASE("inputs respect the box for random states and references") {
  QuadrotorModel m;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    MpcController mpc(m, MpcParams{});
    QuadState st;
    st.p = Vec3(2.0 * u(rng), 2.0 * u(rng), 1.0 + u(rng));
    st.v = Vec3(u(rng), u(rng), u(rng));
    st.w = Vec3(u(rng), u(rng), u(rng));
    st.q = Quat(Eigen::AngleAxisd(
        0.5 * u(rng), Vec3(u(rng), u(rng), u(rng)).normalized()));
    const auto refs = hover_refs(20, Vec3(u(rng), u(rng), 1.0));
    const Command cmd = mpc.control(st, refs);
    for (int i = 0; i < 4; ++i) {
      CHECK(cmd.thrusts()(i) >= m.f_min);
      CHECK(cmd.thrusts()(i) <= m.f_max);
    }
  }
}

TEST_CASE("warm starting along the plan converges in fewer iterations") {
  QuadrotorModel m;
  MpcParams p;
  MpcController mpc(m, p);
  const auto refs = hover_refs(p.horizon, Vec3(0.0, 0.0, 1.0));

  QuadState st = state_at(Vec3(0.3, 0.0, 1.0));
  st.t = 0.0;
  std::vector<QuadState> pred;
  mpc.control(st, refs, &pred);
  const int cold = mpc.stats().iterations;
  REQUIRE(pred.size() == size_t(p.horizon) + 1);

  // next control cycle: the vehicle followed the plan for one node
  mpc.control(pred[1], refs);
  const int warm = mpc.stats().iterations;
  CHECK(warm < cold);
  CHECK(mpc.stats().converged);
  CHECK(!mpc.stats().warned);
}

TEST_CASE("identical inputs produce bitwise identical commands") {
  QuadrotorModel m;
  const auto refs = hover_refs(20, Vec3(1.0, -1.0, 1.5));
  QuadState st = state_at(Vec3(0.5, 0.5, 1.0));
  st.v = Vec3(0.2, -0.1, 0.0);

  MpcController a(m, MpcParams{});
  MpcController b(m, MpcParams{});
  const Command ca = a.control(st, refs);
  const Command cb = b.control(st, refs);
  CHECK(ca.thrusts() == cb.thrusts());
}

TEST_CASE("the predicted rollout starts at the state and walks toward the goal") {
  QuadrotorModel m;
  MpcParams p;
  MpcController mpc(m, p);
  const auto refs = hover_refs(p.horizon, Vec3(1.0, 0.0, 1.0));
  const QuadState st = state_at(Vec3(0.0, 0.0, 1.0));

  std::vector<QuadState> predicted;
  mpc.control(st, refs, &predicted);
  REQUIRE(predicted.size() == size_t(p.horizon) + 1);
  CHECK(predicted.front().p == st.p);
  CHECK(predicted[3].t == doctest::Approx(3.0 * p.dt).epsilon(1e-12));
  const double err0 = (predicted.front().p - Vec3(1.0, 0.0, 1.0)).norm();
  const double errN = (predicted.back().p - Vec3(1.0, 0.0, 1.0)).norm();
  CHECK(errN < 0.5 * err0);
}

TEST_CASE("non-finite state and wrong-sized horizons are rejected") {
  QuadrotorModel m;
  MpcController mpc(m, MpcParams{});
  const auto refs = hover_refs(20, Vec3(0.0, 0.0, 1.0));

  QuadState bad = state_at(Vec3(0.0, 0.0, 1.0));
  bad.p.x() = std::nan("");
  CHECK_THROWS_AS(mpc.control(bad, refs), std::invalid_argument);

  const auto short_refs = hover_refs(19, Vec3(0.0, 0.0, 1.0));
  CHECK_THROWS_AS(mpc.control(state_at(Vec3::Zero()), short_refs),
                  std::invalid_argument);
}

TEST_CASE("parameter validation rejects degenerate settings") {
  auto with = [](auto mod) {
    MpcParams p;
    mod(p);
    return p;
  };
  CHECK_THROWS_AS(with([](MpcParams& p) { p.horizon = 4; }).validate(), ConfigError);
  CHECK_THROWS_AS(with([](MpcParams& p) { p.dt = 0.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(with([](MpcParams& p) { p.w_p = -1.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(with([](MpcParams& p) {
                    p.w_p = p.w_att = p.w_v = p.w_w = 0.0;
                  }).validate(),
                  ConfigError);
  CHECK_THROWS_AS(with([](MpcParams& p) { p.max_iters = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(with([](MpcParams& p) { p.tol = 0.0; }).validate(), ConfigError);
  CHECK_NOTHROW(MpcParams{}.validate());
}
