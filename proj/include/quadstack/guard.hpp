#pragma once

#include <vector>

#include "quadstack/pipeline_config.hpp"
#include "quadstack/types.hpp"

namespace quadstack {

enum class GuardVerdict { kOk, kViolation };

struct GuardEvent {
  double t{0.0};
  Vec3 p{Vec3::Zero()};
};

// Axis-aligned safety box. The box is a closed set: the boundary is fine,
// strictly outside (or a non-finite position) is a violation. A violation
// latches until reset().
class Guard {
 public:
  explicit Guard(const GuardConfig& config);

  GuardVerdict check(const QuadState& state);

  bool latched() const { return latched_; }
  void reset() { latched_ = false; }
  const std::vector<GuardEvent>& events() const { return events_; }

 private:
  GuardConfig config_;
  bool latched_{false};
  std::vector<GuardEvent> events_;
};

}  // namespace quadstack
