#pragma once

#include <array>
#include <functional>
#include <vector>

#include "s2r/rollout.hpp"

namespace s2r {

struct UpdateRecord {
  int update_index = 0;
  long long timesteps = 0;  // cumulative, including the offset
  double mean_return = 0.0;  // over episodes finished during the rollout
  int episodes = 0;
  UpdateStats losses;
  std::array<long long, 4> termination_counts{};  // indexed by TerminationCause
};

struct CurvePoint {
  long long timesteps = 0;
  double mean_return = 0.0;
};

class ProgressSink {
 public:
  virtual ~ProgressSink() = default;
  virtual void on_update(const UpdateRecord&) {}
  virtual void on_measurement(const CurvePoint&) {}
};

// Periodic evaluation on a fixed target set. Points are emitted at every
// multiple of `every` (in cumulative timesteps) crossed by an update.
struct MeasurementPlan {
  std::function<double(const PolicyParameters&)> evaluate;
  long long every = 0;
  bool measure_at_start = false;
};

struct TrainOptions {
  long long timestep_offset = 0;
  ProgressSink* sink = nullptr;
  const MeasurementPlan* measurement = nullptr;
  Execution execution = Execution::parallel;
};

PolicyParameters train_loop(const EnvFactory& make_env, const TrainConfig& cfg,
                            PolicyParameters init, const TrainOptions& options = {});

// Fresh parameters for `cfg`'s architecture, seeded from cfg.seed.
PolicyParameters initial_parameters(const TrainConfig& cfg);

}  // namespace s2r
