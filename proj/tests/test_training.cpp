#include <doctest.h>

#include <filesystem>

#include "s2r/errors.hpp"
#include "s2r/io.hpp"
#include "s2r/strategies.hpp"
#include "s2r/trainer.hpp"
#include "schedule_oracle.hpp"

using namespace s2r;

namespace {

TrainConfig small_config() {
  TrainConfig c;
  c.n_envs = 4;
  c.n_steps_per_update = 32;
  c.minibatch_size = 32;
  c.epochs_per_update = 2;
  c.hidden_sizes = {8, 8};
  c.total_timesteps = 512;
  c.seed = 11;
  return c;
}

EnvFactory factory(RandomizationConfig rand = RandomizationConfig::none()) {
  return [rand](int, std::uint64_t seed) {
    return RandomizedEnv(RobotGeometry{}, EpisodeConfig{}, rand, seed);
  };
}

RandomizationConfig all_on() {
  RandomizationConfig r;
  r.latency_enabled = r.torque_enabled = r.noise_enabled = true;
  return r;
}

struct Recorder : ProgressSink {
  std::vector<UpdateRecord> updates;
  std::vector<CurvePoint> points;
  void on_update(const UpdateRecord& r) override { updates.push_back(r); }
  void on_measurement(const CurvePoint& p) override { points.push_back(p); }
};

}  // namespace

TEST_CASE("derived seeds are distinct and stable") {
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
}

TEST_CASE("serial and parallel rollouts fill identical buffers") {
  Rng rng(1);
  const int hidden[] = {8, 8};
  const PolicyParameters p = PolicyParameters::initialize(hidden, 0.0, rng);
  for (const auto& rand : {RandomizationConfig::none(), all_on()}) {
    auto a = make_env_slots(factory(rand), 6, 99);
    auto b = make_env_slots(factory(rand), 6, 99);
    RolloutBuffer ba, bb;
    for (int k = 0; k < 3; ++k) {
      collect_rollout(p, a, 100, ba, Execution::serial);
      collect_rollout(p, b, 100, bb, Execution::parallel);
      CHECK(ba == bb);
    }
    CHECK(ba.full());
    CHECK(ba.size() == 600);
  }
}

TEST_CASE("rollout buffers record episode boundaries") {
  Rng rng(2);
  const int hidden[] = {4, 4};
  const PolicyParameters p = PolicyParameters::initialize(hidden, 0.0, rng);
  auto slots = make_env_slots(factory(), 2, 5);
  RolloutBuffer b;
  collect_rollout(p, slots, 300, b, Execution::serial);
  int dones = 0;
  for (auto d : b.dones) dones += d;
  CHECK(dones >= 2);  // the 250-step horizon ends at least one episode per env
  std::size_t finished = 0;
  for (const auto& s : slots) finished += s.finished.size();
  CHECK(finished == static_cast<std::size_t>(dones));
}

TEST_CASE("zero budget returns the initial parameters") {
  TrainConfig c = small_config();
  c.total_timesteps = 0;
  const PolicyParameters init = initial_parameters(c);
  CHECK(train_loop(factory(), c, init) == init);
}

TEST_CASE("training is deterministic and independent of the executor") {
  const TrainConfig c = small_config();
  TrainOptions serial;
  serial.execution = Execution::serial;
  const PolicyParameters a = train_loop(factory(all_on()), c, initial_parameters(c));
  const PolicyParameters b = train_loop(factory(all_on()), c, initial_parameters(c), serial);
  CHECK(a == b);
  TrainConfig other = c;
  other.seed = 12;
  CHECK_FALSE(train_loop(factory(all_on()), other, initial_parameters(c)) == a);
}

TEST_CASE("budget accounting and measurement cadence") {
  TrainConfig c = small_config();
  c.total_timesteps = 300;  // 2 full updates of 128 and a truncated one of 11 steps x 4 envs
  Recorder rec;
  MeasurementPlan plan{[](const PolicyParameters&) { return -1.0; }, 100, true};
  TrainOptions o;
  o.sink = &rec;
  o.measurement = &plan;
  o.timestep_offset = 1000;
  train_loop(factory(), c, initial_parameters(c), o);
  REQUIRE(rec.updates.size() == 3);
  CHECK(rec.updates[0].timesteps == 1128);
  CHECK(rec.updates[1].timesteps == 1256);
  CHECK(rec.updates[2].timesteps == 1300);
  REQUIRE(rec.points.size() == 4);
  CHECK(rec.points[0].timesteps == 1000);
  CHECK(rec.points[1].timesteps == 1100);
  CHECK(rec.points[2].timesteps == 1200);
  CHECK(rec.points[3].timesteps == 1300);
}

TEST_CASE("schedules follow the strategy definitions") {
  CHECK(schedule_violations(Budgets::scaled(0.01)) == 0);
  CHECK(schedule_violations(Budgets::scaled(1.0)) == 0);
  const Budgets b = Budgets::scaled(0.01);
  CHECK(b.pretrain == 310000);
  CHECK(b.adapt_total == 90000);
  CHECK(b.per_phase == 30000);
}

TEST_CASE("schedule errors") {
  CHECK_THROWS_AS(parse_permutation("TTL"), ScheduleError);
  CHECK_THROWS_AS(parse_permutation("TN"), ScheduleError);
  CHECK_THROWS_AS(parse_permutation("TNX"), ScheduleError);
  CHECK_THROWS_AS(build_schedule(StrategyName::curriculum, std::nullopt, Budgets::scaled(0.01)),
                  ScheduleError);
  Budgets bad = Budgets::scaled(0.01);
  bad.per_phase = 1;
  CHECK_THROWS_AS(build_schedule(StrategyName::fine_tuning, parse_permutation("LTN"), bad), ScheduleError);
  CHECK(build_schedule(StrategyName::ik_baseline, std::nullopt, Budgets::scaled(0.01)).phases.empty());
  CHECK_THROWS_AS(parse_strategy("greedy"), ScheduleError);
}

namespace {

StrategyContext tiny_context(const std::filesystem::path& root) {
  StrategyContext ctx;
  ctx.train = small_config();
  ctx.env_config_hash = "cafe";
  ctx.pretrain_cache_dir = root / "cache";
  ctx.run_dir = root / "run";
  ctx.measurement.every = 128;
  ctx.measurement.evaluate = [](const PolicyParameters& p) { return p.log_std.sum(); };
  return ctx;
}

Budgets tiny_budgets() { return {256, 384, 128}; }

}  // namespace

TEST_CASE("pretraining is shared across strategies and byte-identical") {
  const auto root = std::filesystem::temp_directory_path() / "s2r_strategy_test";
  std::filesystem::remove_all(root);
  StrategyContext ctx = tiny_context(root);
  const std::uint64_t seeds[] = {3};
  const auto curriculum = build_schedule(StrategyName::curriculum, parse_permutation("NLT"), tiny_budgets());
  const auto runs = run_strategy(curriculum, ctx, seeds);
  const auto cached = pretrain_cache_path(ctx, 3, 256);
  REQUIRE(std::filesystem::exists(cached));
  const std::string first = read_file(cached);

  // A different strategy reuses the cached file untouched.
  ctx.run_dir = root / "run2";
  const auto i2r = build_schedule(StrategyName::ideal2randomized, std::nullopt, tiny_budgets());
  run_strategy(i2r, ctx, seeds);
  CHECK(read_file(cached) == first);

  // The cache equals pretraining from scratch with the phase seed.
  const auto fresh_root = root / "fresh";
  StrategyContext fresh = tiny_context(fresh_root);
  const auto only_pretrain = build_schedule(StrategyName::fine_tuning, parse_permutation("LTN"), tiny_budgets());
  run_strategy(only_pretrain, fresh, seeds);
  CHECK(read_file(pretrain_cache_path(fresh, 3, 256)) == first);

  CHECK(runs.front().curve.front().timesteps == 0);
  CHECK(runs.front().curve.back().timesteps == 640);
  CHECK(runs.front().phase_checkpoints.size() == 4);
  std::filesystem::remove_all(root);
}

TEST_CASE("interrupted runs resume to identical results") {
  const auto root = std::filesystem::temp_directory_path() / "s2r_resume_test";
  std::filesystem::remove_all(root);
  StrategyContext ctx = tiny_context(root);
  const std::uint64_t seeds[] = {1};
  const auto schedule = build_schedule(StrategyName::fine_tuning, parse_permutation("TLN"), tiny_budgets());
  const auto full = run_strategy(schedule, ctx, seeds).front();
  const auto last = full.phase_checkpoints.back();
  const std::string bytes = read_file(last);
  std::filesystem::remove(last.string() + ".key");
  const auto resumed = run_strategy(schedule, ctx, seeds).front();
  CHECK(resumed.params == full.params);
  CHECK(resumed.progress_rows == full.progress_rows);
  CHECK(read_file(last) == bytes);
  REQUIRE(resumed.curve.size() == full.curve.size());
  for (std::size_t i = 0; i < full.curve.size(); ++i) {
    CHECK(resumed.curve[i].timesteps == full.curve[i].timesteps);
    CHECK(resumed.curve[i].mean_return == full.curve[i].mean_return);
  }

  // Artifacts from another configuration are refused.
  ctx.env_config_hash = "beef";
  ctx.pretrain_cache_dir = root / "other_cache";
  CHECK_THROWS_AS(run_strategy(schedule, ctx, seeds), CheckpointError);
  std::filesystem::remove_all(root);
}
