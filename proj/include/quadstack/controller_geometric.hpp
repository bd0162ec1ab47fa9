#pragma once

#include "quadstack/model.hpp"
#include "quadstack/types.hpp"

namespace quadstack {

struct GeometricGains {
  Vec3 kp{8.0, 8.0, 8.0};
  Vec3 kv{5.0, 5.0, 5.0};
  Vec3 katt{6.0, 6.0, 3.0};
};

// Cascaded geometric tracking controller producing collective thrust +
// bodyrate commands. Attitude error is split into a tilt part and a yaw part
// so a large heading error cannot starve tilt correction.
class GeometricController {
 public:
  GeometricController(const QuadrotorModel& model, const GeometricGains& gains);

  Command control(const QuadState& state, const Setpoint& sp);

  // Set when the total commanded acceleration degenerated and the previous
  // attitude command was held.
  bool singular() const { return singular_; }

 private:
  QuadrotorModel model_;
  GeometricGains gains_;
  bool singular_{false};
  bool have_prev_{false};
  Command prev_cmd_;
};

}  // namespace quadstack
