#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <random>
#include <span>
#include <string_view>

#include "s2r/robot_model.hpp"

namespace s2r {

using Rng = std::mt19937_64;

inline constexpr std::size_t kObsDim = 5;
inline constexpr std::size_t kActDim = 2;

// Agent state [dx, dy, dz, q1, q2]: target minus end-effector, then joints.
struct Observation {
  std::array<double, kObsDim> values{};

  double dx() const { return values[0]; }
  double dy() const { return values[1]; }
  double dz() const { return values[2]; }
  double q1() const { return values[3]; }
  double q2() const { return values[4]; }

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  friend bool operator==(const Observation&, const Observation&) = default;
};

enum class Mode { training, evaluation };
enum class TerminationCause { none, floor_collision, joint_limit, horizon };

std::string_view to_string(Mode mode);
std::string_view to_string(TerminationCause cause);
Mode parse_mode(std::string_view text);
TerminationCause parse_termination_cause(std::string_view text);

struct EpisodeConfig {
  int horizon = 250;
  double dt = 0.02;
  double max_speed = 1.0;
  Mode mode = Mode::training;
  double min_target_height = 0.10;
  // Hard stops of the joints; positions never leave these bounds.
  JointLimits mechanical_limits = JointLimits::mechanical();
  // Terminal condition in evaluation mode.
  JointLimits safety_limits = JointLimits::evaluation_safety();

  void validate() const;
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool terminated = false;
  TerminationCause termination_cause = TerminationCause::none;
};

// Uniform point on the reachable shell (sphere of radius link_length about the
// joint-2 axis) with z >= min_height.
Vec3 sample_target(const RobotGeometry& geom, double min_height, Rng& rng);

// Per-step reward: -d, or -d * (T - t) on the step where the terminal
// condition fires. `t` is the 1-based step index.
double compute_reward(double distance, int t, int horizon, bool terminated_early);

double episode_return(std::span<const double> rewards);

// Distance of `target` from the reachable shell.
double shell_distance(const RobotGeometry& geom, const Vec3& target);

Observation make_observation(const RobotGeometry& geom, const Vec3& target, double q1, double q2);

// The bare reach-and-balance environment with ideal joint velocity control.
// Stepping is split into `clamp` and `commit` so that alternative joint
// drives can advance the state in between.
class ReachEnv {
 public:
  ReachEnv(RobotGeometry geom, EpisodeConfig config);

  Observation reset(const Vec3& target);
  // Starts an episode from an arbitrary joint state.
  Observation reset_to(const Vec3& target, const RobotState& state);

  StepResult step(const Action& action);

  Action clamp(const Action& action) const;
  // Ideal drive: the commanded velocity is reached instantaneously.
  RobotState advance_ideal(const Action& clamped) const;
  // Applies the next joint state and scores the step.
  StepResult commit(const RobotState& next);

  const RobotGeometry& geometry() const { return geom_; }
  const EpisodeConfig& config() const { return config_; }
  const RobotState& state() const { return state_; }
  const Vec3& target() const { return target_; }
  int t() const { return t_; }
  bool terminated() const { return terminated_; }
  bool target_unreachable() const { return target_unreachable_; }
  double distance() const;
  Observation observation() const;

 private:
  void require_running() const;

  RobotGeometry geom_;
  EpisodeConfig config_;
  RobotState state_;
  Vec3 target_ = Vec3::Zero();
  int t_ = 0;
  bool started_ = false;
  bool terminated_ = false;
  bool target_unreachable_ = false;
};

// Streams episode traces as CSV rows of what the agent observed.
class TraceWriter {
 public:
  explicit TraceWriter(std::ostream& out);
  void write(int step, const StepResult& result);

 private:
  std::ostream* out_;
};

}  // namespace s2r
