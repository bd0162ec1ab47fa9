#include "quadstack/guard.hpp"

#include "quadstack/errors.hpp"

namespace quadstack {

Guard::Guard(const GuardConfig& config) : config_(config) {
  config_.validate();
}

GuardVerdict Guard::check(const QuadState& state) {
  if (!config_.enabled) return GuardVerdict::kOk;
  if (latched_) return GuardVerdict::kViolation;

  bool outside = !state.p.allFinite();
  for (int i = 0; i < 3 && !outside; ++i) {
    if (state.p(i) < config_.box_min(i) || state.p(i) > config_.box_max(i))
      outside = true;
  }
  if (!outside) return GuardVerdict::kOk;

  latched_ = true;
  events_.push_back({state.t, state.p});
  return GuardVerdict::kViolation;
}

}  // namespace quadstack
