#pragma once

#include <cstdint>
#include <vector>

#include "s2r/task_env.hpp"

namespace s2r {

struct Range {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  friend bool operator==(const Range&, const Range&) = default;
};

// Latency (L), torque (T) and noise (N) randomization. Latency and noise are
// redrawn every timestep, stiffness and damping once per episode.
struct RandomizationConfig {
  bool latency_enabled = false;
  Range latency{0.0, 1.0};  // seconds
  bool torque_enabled = false;
  Range stiffness{1.0, 100.0};
  Range damping{1.0, 100.0};
  bool noise_enabled = false;
  Range noise{0.0, 0.10};  // relative magnitude

  void validate() const;
  bool any_enabled() const { return latency_enabled || torque_enabled || noise_enabled; }

  static RandomizationConfig none() { return {}; }
};

// Buffered ideal observations and the last latency-affected output.
class LatencyState {
 public:
  void reset(const Observation& initial);
  // History entries must arrive for consecutive steps 1, 2, ...
  void record(int t, const Observation& ideal);
  // Observation seen at step t under `latency` seconds of delay.
  Observation apply(int t, double latency, double dt);

  double last_effective_time() const { return t_prev_; }
  std::size_t history_size() const { return history_.size(); }

 private:
  std::vector<Observation> history_;  // index == step
  double t_prev_ = 0.0;
  Observation last_output_;
};

struct TorqueParams {
  double stiffness = 1.0;
  double damping = 1.0;
  // Position set-point per joint: integral of the commanded velocity.
  std::array<double, 2> integrated_command{};
};

// Unit-inertia spring-damper drive per joint,
//   qdd = stiffness * (q_cmd - q) + damping * (qd_cmd - qd),
// advanced one step with the drive forces evaluated at the end of the step
// (velocity first, then position with the new velocity).
RobotState step_torque_dynamics(TorqueParams& params, const RobotState& state,
                                const Action& command, double dt);

// Multiplicative noise c * (1 + u), u ~ U(-level, level), per component.
Observation apply_noise(const Observation& obs, double level, Rng& rng);
Action apply_noise(const Action& action, double level, Rng& rng);

TorqueParams draw_episode_params(const RandomizationConfig& config, Rng& rng);

double draw_uniform(const Range& range, Rng& rng);

// The task environment composed with the enabled randomization wrappers.
// Per step: action noise, joint drive (torque or ideal), ideal observation
// recorded, latency, observation noise. With every flag off it is
// bit-identical to the bare ReachEnv.
class RandomizedEnv {
 public:
  RandomizedEnv(RobotGeometry geom, EpisodeConfig episode, RandomizationConfig config,
                std::uint64_t seed);

  Vec3 sample_target();
  Observation reset(const Vec3& target);
  Observation reset_to(const Vec3& target, const RobotState& state);
  StepResult step(const Action& action);

  const ReachEnv& bare() const { return env_; }
  const RandomizationConfig& randomization() const { return config_; }
  const TorqueParams& torque_params() const { return torque_; }
  const LatencyState& latency_state() const { return latency_; }

 private:
  Observation observe(const Observation& ideal, int t, double noise_level);
  double draw_noise_level();

  ReachEnv env_;
  RandomizationConfig config_;
  Rng rng_;
  TorqueParams torque_;
  LatencyState latency_;
};

RandomizedEnv compose(RobotGeometry geom, EpisodeConfig episode, const RandomizationConfig& config,
                      std::uint64_t seed);

}  // namespace s2r
