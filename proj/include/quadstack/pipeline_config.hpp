#pragma once

#include <string>

#include "quadstack/controller_geometric.hpp"
#include "quadstack/controller_indi.hpp"
#include "quadstack/controller_mpc.hpp"
#include "quadstack/estimator.hpp"
#include "quadstack/types.hpp"

namespace quadstack {

enum class EstimatorKind { kFeedthrough, kEkf };
enum class SamplerKind { kTime, kPosition };
enum class OuterControllerKind { kGeometric, kMpc };
enum class InnerControllerKind { kNone, kIndi };
enum class BridgeKind { kSim, kLog, kSimAndLog };

// Which blocks a pilot instance wires together and how fast it runs.
struct PipelineConfig {
  double control_rate{100.0};  // [Hz], valid range [50, 1000]

  EstimatorKind estimator{EstimatorKind::kFeedthrough};
  EkfParams ekf;

  SamplerKind sampler{SamplerKind::kTime};
  double sampler_window{2.0};  // position-sampler search window [s]

  OuterControllerKind outer{OuterControllerKind::kGeometric};
  GeometricGains geometric;
  MpcParams mpc;

  InnerControllerKind inner{InnerControllerKind::kNone};
  IndiParams indi;

  BridgeKind bridge{BridgeKind::kSim};

  // Feed-through of externally supplied commands; when the stream goes
  // silent longer than this, the pilot takes over with a hover.
  double feedthrough_timeout{0.1};  // [s]

  void validate() const;  // throws ConfigError
};

// Safety box plus the pipeline to fall back to when it is violated.
struct GuardConfig {
  bool enabled{true};
  Vec3 box_min{-10.0, -10.0, -0.5};
  Vec3 box_max{10.0, 10.0, 10.0};
  PipelineConfig backup;  // defaults: geometric + feed-through

  void validate() const;
};

struct PilotConfig {
  PipelineConfig pipeline;
  GuardConfig guard;

  void validate() const;
};

}  // namespace quadstack
