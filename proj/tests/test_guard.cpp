#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "quadstack/errors.hpp"
#include "quadstack/guard.hpp"

using namespace quadstack;

namespace {

QuadState at(double t, const Vec3& p) {
  QuadState st;
  st.t = t;
  st.p = p;
  return st;
}

}  // namespace

TEST_CASE("inside the box everything is fine") {
  Guard guard{GuardConfig{}};
  CHECK(guard.check(at(0.0, Vec3(0.0, 0.0, 1.0))) == GuardVerdict::kOk);
  CHECK(guard.check(at(0.1, Vec3(9.99, -9.99, 9.99))) == GuardVerdict::kOk);
  CHECK(!guard.latched());
  CHECK(guard.events().empty());
}

TEST_CASE("the boundary itself still counts as inside") {
  GuardConfig cfg;
  Guard guard{cfg};
  CHECK(guard.check(at(0.0, cfg.box_max)) == GuardVerdict::kOk);
  CHECK(guard.check(at(0.1, cfg.box_min)) == GuardVerdict::kOk);
  CHECK(!guard.latched());
}

TEST_CASE("a millimeter beyond the boundary violates and records the event") {
  GuardConfig cfg;
  Guard guard{cfg};
  const Vec3 p = cfg.box_max + Vec3(1e-3, 0.0, 0.0);
  CHECK(guard.check(at(2.5, p)) == GuardVerdict::kViolation);
  CHECK(guard.latched());
  REQUIRE(guard.events().size() == 1);
  CHECK(guard.events()[0].t == 2.5);
  CHECK(guard.events()[0].p == p);
}

TEST_CASE("a violation latches until reset, without duplicate events") {
  Guard guard{GuardConfig{}};
  CHECK(guard.check(at(0.0, Vec3(0.0, 0.0, 20.0))) == GuardVerdict::kViolation);
  // back inside, but the latch holds
  CHECK(guard.check(at(0.1, Vec3(0.0, 0.0, 1.0))) == GuardVerdict::kViolation);
  CHECK(guard.events().size() == 1);

  guard.reset();
  CHECK(guard.check(at(0.2, Vec3(0.0, 0.0, 1.0))) == GuardVerdict::kOk);
  // a fresh excursion is a fresh event
  CHECK(guard.check(at(0.3, Vec3(0.0, 0.0, 20.0))) == GuardVerdict::kViolation);
  CHECK(guard.events().size() == 2);
}

TEST_CASE("a non-finite position is a violation") {
  Guard guard{GuardConfig{}};
  QuadState st = at(0.0, Vec3(0.0, 0.0, 1.0));
  st.p.y() = std::nan("");
  CHECK(guard.check(st) == GuardVerdict::kViolation);
  st.p.y() = std::numeric_limits<double>::infinity();
  Guard guard2{GuardConfig{}};
  CHECK(guard2.check(st) == GuardVerdict::kViolation);
}

TEST_CASE("a disabled guard never trips") {
  GuardConfig cfg;
  cfg.enabled = false;
  Guard guard{cfg};
  CHECK(guard.check(at(0.0, Vec3(500.0, 0.0, 0.0))) == GuardVerdict::kOk);
  CHECK(!guard.latched());
  CHECK(guard.events().empty());
}

TEST_CASE("an inverted box is rejected at construction") {
  GuardConfig cfg;
  cfg.box_min.x() = cfg.box_max.x();
  CHECK_THROWS_AS(Guard{cfg}, ConfigError);
}
