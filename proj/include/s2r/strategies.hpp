#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "s2r/randomization.hpp"
#include "s2r/trainer.hpp"

namespace s2r {

enum class RandParam : std::uint8_t { L = 1, T = 2, N = 4 };

// Subset of {L, T, N} as a bit mask.
struct ParamSet {
  std::uint8_t bits = 0;

  static ParamSet of(RandParam p) { return {static_cast<std::uint8_t>(p)}; }
  static ParamSet all() { return {7}; }
  bool contains(RandParam p) const { return (bits & static_cast<std::uint8_t>(p)) != 0; }
  bool contains(ParamSet other) const { return (bits & other.bits) == other.bits; }
  bool empty() const { return bits == 0; }
  int size() const;
  ParamSet operator|(ParamSet o) const { return {static_cast<std::uint8_t>(bits | o.bits)}; }
  ParamSet operator&(ParamSet o) const { return {static_cast<std::uint8_t>(bits & o.bits)}; }
  std::string to_string() const;  // e.g. "{T,N}" or "{}"
  friend bool operator==(ParamSet, ParamSet) = default;
};

using Permutation = std::array<RandParam, 3>;

// Parses an ordering such as "TNL". Throws ScheduleError.
Permutation parse_permutation(std::string_view text);
std::string to_string(const Permutation& p);
// The six orderings in the row order of the published comparison table.
const std::array<Permutation, 6>& all_permutations();

enum class StrategyName { ideal, fine_tuning, curriculum, ideal2randomized, randomized, ik_baseline };

StrategyName parse_strategy(std::string_view text);
std::string_view to_string(StrategyName name);
bool requires_permutation(StrategyName name);
const std::array<StrategyName, 6>& all_strategies();

enum class StartFrom { fresh, inherited };

struct Phase {
  long long timestep_budget = 0;
  ParamSet active;
  StartFrom start_from = StartFrom::fresh;
  // The ideal pretraining phase shared across strategies.
  bool shared_pretrain = false;
};

struct Budgets {
  long long pretrain = 0;
  long long adapt_total = 0;
  long long per_phase = 0;

  long long total() const { return pretrain + adapt_total; }
  // Scales the 31M / 9M / 3M split by `factor`.
  static Budgets scaled(double factor);
};

struct StrategySchedule {
  StrategyName name = StrategyName::ideal;
  std::optional<Permutation> permutation;
  std::vector<Phase> phases;

  long long total_budget() const;
  std::string sequence() const;  // permutation text or "N/A"
};

StrategySchedule build_schedule(StrategyName name, std::optional<Permutation> permutation,
                                const Budgets& budgets);

std::string describe(const StrategySchedule& schedule);

// Everything run_strategy needs besides the schedule.
struct StrategyContext {
  RobotGeometry geometry;
  EpisodeConfig training_episode;
  RandomizationConfig ranges;  // enable flags are ignored; phases set them
  TrainConfig train;           // total_timesteps and seed are set per phase
  MeasurementPlan measurement;
  // Identifies the environment/trainer setup; part of every cache key.
  std::string env_config_hash;
  std::filesystem::path pretrain_cache_dir;
  // Per-seed phase checkpoints for resuming; empty disables.
  std::filesystem::path run_dir;
  ProgressSink* sink = nullptr;
  Execution execution = Execution::parallel;
};

struct SeedRun {
  std::uint64_t seed = 0;
  PolicyParameters params;
  std::vector<CurvePoint> curve;
  // Rendered progress rows (no header), one per PPO update, all phases.
  std::string progress_rows;
  std::vector<std::filesystem::path> phase_checkpoints;
};

RandomizationConfig phase_randomization(const RandomizationConfig& ranges, ParamSet active);

// Trains every seed through the schedule's phases. The ideal pretraining
// phase is cached under pretrain_cache_dir keyed by (seed, budget, env
// config hash) and reused by every strategy that starts from it.
std::vector<SeedRun> run_strategy(const StrategySchedule& schedule, const StrategyContext& context,
                                  std::span<const std::uint64_t> seeds);

std::filesystem::path pretrain_cache_path(const StrategyContext& context, std::uint64_t seed,
                                          long long budget);

}  // namespace s2r
