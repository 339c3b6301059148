#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "s2r/eval.hpp"
#include "s2r/strategies.hpp"

namespace s2r {

enum class Experiment { exp1_1rad, exp2_pi9 };
std::string_view to_string(Experiment e);
Experiment parse_experiment(std::string_view text);

// Complete description of a benchmark run. Every key is required when
// loading from JSON and unknown keys are rejected.
struct RunConfig {
  Experiment experiment = Experiment::exp1_1rad;
  RobotGeometry geometry;
  EpisodeConfig training_episode;
  EvalProtocol evaluation;
  RandomizationConfig randomization;  // ranges; flags come from the schedule
  PseudoRealConfig pseudo_real;
  TrainConfig train;
  StrategyName strategy = StrategyName::ideal;
  std::optional<Permutation> sequence;
  Budgets budgets = Budgets::scaled(0.01);
  long long measurement_every = 10000;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::string output_dir = "runs";

  // Defaults for the first experiment at desk scale.
  static RunConfig defaults(Experiment experiment = Experiment::exp1_1rad);

  void validate() const;
  // Switches the experiment tag together with its training speed and horizon.
  void set_experiment(Experiment e);
  StrategySchedule schedule() const;

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::filesystem::path& path);

  // Digest of the canonical serialization.
  std::string hash() const;
  // Digest of the settings that determine training outcomes for a phase
  // (geometry, episodes, ranges, trainer hyperparameters, cadence).
  std::string env_hash() const;
};

}  // namespace s2r
