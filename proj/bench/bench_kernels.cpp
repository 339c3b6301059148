// Serial reference vs OpenMP kernels: rollout collection and evaluation.
#include <benchmark/benchmark.h>

#include "s2r/eval.hpp"
#include "s2r/rollout.hpp"

using namespace s2r;

namespace {

PolicyParameters bench_policy() {
  Rng rng(0);
  const int hidden[] = {64, 64};
  return PolicyParameters::initialize(hidden, 0.0, rng);
}

RandomizationConfig all_on() {
  RandomizationConfig r;
  r.latency_enabled = r.torque_enabled = r.noise_enabled = true;
  return r;
}

void rollout(benchmark::State& state, Execution execution) {
  const PolicyParameters p = bench_policy();
  const bool randomized = state.range(0) != 0;
  auto slots = make_env_slots(
      [randomized](int, std::uint64_t seed) {
        return RandomizedEnv(RobotGeometry{}, EpisodeConfig{},
                             randomized ? all_on() : RandomizationConfig::none(), seed);
      },
      64, 1);
  RolloutBuffer buffer;
  for (auto _ : state) {
    collect_rollout(p, slots, 256, buffer, execution);
    benchmark::DoNotOptimize(buffer.rewards.data());
  }
  state.SetItemsProcessed(state.iterations() * 64 * 256);
}

void evaluation(benchmark::State& state, Execution execution) {
  const PolicyAgent agent(bench_policy());
  const EvalEnvironment setup;
  const EnvKind kind = state.range(0) != 0 ? EnvKind::pseudo_real : EnvKind::sim;
  for (auto _ : state) {
    EvalReport r = evaluate(agent, kind, setup, execution);
    benchmark::DoNotOptimize(r.episodes.data());
  }
  state.SetItemsProcessed(state.iterations() * setup.protocol.n_targets * setup.protocol.horizon);
}

}  // namespace

BENCHMARK_CAPTURE(rollout, serial, Execution::serial)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(rollout, parallel, Execution::parallel)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(evaluation, serial, Execution::serial)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(evaluation, parallel, Execution::parallel)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
