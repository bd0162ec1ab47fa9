#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "quadstack/quaternion.hpp"

using namespace quadstack;

TEST_CASE("zero rate leaves the attitude alone") {
  const Quat q = quaternion_integrate(Quat::Identity(), Vec3::Zero(), 0.01);
  CHECK(q.w() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(q.vec().norm() == doctest::Approx(0.0).scale(1));
}

TEST_CASE("pi about z for one second is a half turn in yaw") {
  const Quat q =
      quaternion_integrate(Quat::Identity(), Vec3(0.0, 0.0, M_PI), 1.0);
  CHECK(std::abs(q.w()) < 1e-12);
  CHECK(std::abs(q.x()) < 1e-12);
  CHECK(std::abs(q.y()) < 1e-12);
  CHECK(q.z() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("constant rate: many small steps equal one big step") {
  // constant bodyrate rotations commute, so subdivision changes nothing
  const Vec3 w(0.3, -0.2, 0.1);
  Quat fine = Quat::Identity();
  for (int i = 0; i < 1000; ++i) fine = quaternion_integrate(fine, w, 1e-3);
  const Quat coarse = quaternion_integrate(Quat::Identity(), w, 1.0);
  CHECK(coarse.angularDistance(fine) < 1e-6);
}

TEST_CASE("rotation vector round trip") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    Vec3 r(dist(rng), dist(rng), dist(rng));
    r *= 2.5;  // angles up to ~4.3 rad, below the pi wrap
    if (r.norm() >= M_PI) r *= (M_PI - 1e-3) / r.norm();
    const Quat q = quat_from_rotvec(r);
    CHECK(std::abs(q.norm() - 1.0) < 1e-12);
    const Vec3 back = quat_to_rotvec(q);
    CHECK((back - r).norm() < 1e-9);
  }
}

TEST_CASE("tiny rotation vectors survive the small-angle branch") {
  const Vec3 r(1e-14, -2e-14, 5e-15);
  const Quat q = quat_from_rotvec(r);
  CHECK(std::abs(q.norm() - 1.0) < 1e-15);
  const Vec3 back = quat_to_rotvec(q);
  CHECK((back - r).norm() < 1e-15);
}

TEST_CASE("rotation vector ignores the double-cover sign") {
  const Quat q = quat_from_rotvec(Vec3(0.4, 0.1, -0.2));
  Quat neg(-q.w(), -q.x(), -q.y(), -q.z());
  const Vec3 a = quat_to_rotvec(q);
  const Vec3 b = quat_to_rotvec(neg);
  CHECK((a - b).norm() < 1e-12);
}

TEST_CASE("skew matrix reproduces the cross product") {
  const Vec3 a(0.3, -1.2, 0.7), b(2.0, 0.4, -0.9);
  CHECK((skew(a) * b - a.cross(b)).norm() < 1e-15);
  CHECK((skew(a) + skew(a).transpose()).norm() == 0.0);
}

TEST_CASE("integration keeps the quaternion normalized") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-10.0, 10.0);
  Quat q = Quat::Identity();
  for (int i = 0; i < 1000; ++i) {
    const Vec3 w(dist(rng), dist(rng), dist(rng));
    q = quaternion_integrate(q, w, 1e-3);
    CHECK(std::abs(q.norm() - 1.0) < 1e-12);
  }
}
