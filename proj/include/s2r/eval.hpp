#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "s2r/ik_baseline.hpp"
#include "s2r/policy.hpp"
#include "s2r/randomization.hpp"
#include "s2r/rollout.hpp"

namespace s2r {

// Fixed evaluation protocol shared by the simulated and pseudo-real runs.
struct EvalProtocol {
  int n_targets = 50;
  std::uint64_t target_seed = 2022;
  int horizon = 500;
  double dt = 0.02;
  double max_speed = std::numbers::pi / 9.0;
  JointLimits limits = JointLimits::evaluation_safety();
  double min_target_height = 0.10;
  // Targets whose joint solution lies within this margin of the safety
  // limits are skipped when generating the target set.
  double target_margin = deg_to_rad(2.0);

  void validate() const;
  EpisodeConfig episode_config() const;
  friend bool operator==(const EvalProtocol&, const EvalProtocol&) = default;
};

// Frozen stand-in for the physical robot: one interior draw of every
// randomization parameter. Zero values disable the corresponding effect.
struct PseudoRealConfig {
  double latency = 0.12;
  double stiffness = 40.0;
  double damping = 25.0;
  double noise = 0.02;
  std::uint64_t hidden_seed = 0x5eed2022ULL;

  RandomizationConfig to_randomization() const;
  // Throws ConfigError unless every non-zero value lies strictly inside the
  // training ranges.
  void check_interior(const RandomizationConfig& training_ranges) const;

  static PseudoRealConfig disabled() { return {0.0, 0.0, 0.0, 0.0, 0}; }
};

enum class EnvKind { sim, pseudo_real };
std::string_view to_string(EnvKind kind);
EnvKind parse_env_kind(std::string_view text);

// The target set depends only on the protocol and geometry.
std::vector<Vec3> evaluation_targets(const RobotGeometry& geom, const EvalProtocol& protocol);

using Controller = std::function<Action(const Observation&)>;

// Produces a per-episode controller; implementations must be safe to call
// concurrently for different targets.
class EvalAgent {
 public:
  virtual ~EvalAgent() = default;
  virtual Controller start_episode(int target_index, const Vec3& target) const = 0;
};

// Trained policy, acting with the Gaussian mean.
class PolicyAgent : public EvalAgent {
 public:
  explicit PolicyAgent(PolicyParameters params);
  Controller start_episode(int target_index, const Vec3& target) const override;

 private:
  std::shared_ptr<const PolicyParameters> params_;
};

// Inverse-kinematics controller acting on the observed joint angles.
class IkAgent : public EvalAgent {
 public:
  IkAgent(RobotGeometry geom, double max_speed, double dt);
  Controller start_episode(int target_index, const Vec3& target) const override;

 private:
  RobotGeometry geom_;
  double max_speed_;
  double dt_;
};

class RandomAgent : public EvalAgent {
 public:
  RandomAgent(std::uint64_t seed, double max_speed);
  Controller start_episode(int target_index, const Vec3& target) const override;

 private:
  std::uint64_t seed_;
  double max_speed_;
};

class ConstantAgent : public EvalAgent {
 public:
  explicit ConstantAgent(Action action) : action_(action) {}
  Controller start_episode(int, const Vec3&) const override;

 private:
  Action action_;
};

struct EpisodeRecord {
  int target_index = 0;
  Vec3 target = Vec3::Zero();
  double episode_return = 0.0;
  double final_distance = 0.0;
  TerminationCause cause = TerminationCause::none;
  int steps = 0;

  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

struct EvalReport {
  std::vector<EpisodeRecord> episodes;
  EnvKind env_kind = EnvKind::sim;
  std::string strategy = "unknown";
  std::string sequence = "N/A";
  std::uint64_t seed = 0;
  std::string config_hash;

  double mean_return() const;
  double std_return() const;  // population
  double pct_termination(TerminationCause cause) const;
  double median_final_distance() const;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

struct EvalEnvironment {
  RobotGeometry geometry;
  EvalProtocol protocol;
  PseudoRealConfig pseudo_real;
};

// One episode per target from the home pose; sim is the ideal environment,
// pseudo_real wraps it with the frozen PseudoRealConfig.
EvalReport evaluate(const EvalAgent& agent, EnvKind kind, const EvalEnvironment& setup,
                    Execution execution = Execution::parallel);

// Runs one episode; exposed for tests and calibration.
EpisodeRecord run_episode(const EvalAgent& agent, RandomizedEnv& env, int target_index,
                          const Vec3& target);

// Evaluates under an arbitrary randomization config (calibration sweeps).
EvalReport evaluate_randomized(const EvalAgent& agent, const RandomizationConfig& randomization,
                               std::uint64_t env_seed, const RobotGeometry& geom,
                               const EvalProtocol& protocol,
                               Execution execution = Execution::parallel);

// mean_return(sim) - mean_return(real); positive means transfer degrades.
double sim2real_gap(const EvalReport& sim, const EvalReport& real);

struct SummaryRow {
  std::string strategy;
  std::string sequence;
  double avg_sim = 0.0;
  double std_sim = 0.0;
  double best_sim = 0.0;
  double best_pseudo_real = 0.0;
  double gap = 0.0;
  double pct_joint_limit = 0.0;
  int n_seeds = 0;
  bool has_sim = false;
  bool has_pseudo_real = false;
};

// Table-style comparison, one row per (strategy, sequence) plus an "N/A"
// aggregate row for strategies evaluated under several sequences.
std::vector<SummaryRow> summarize(const std::vector<EvalReport>& reports);

}  // namespace s2r
