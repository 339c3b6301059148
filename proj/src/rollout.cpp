#include "s2r/rollout.hpp"

#include <exception>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace s2r {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

EnvSlot::EnvSlot(RandomizedEnv e, std::uint64_t policy_seed)
    : env(std::move(e)), policy_rng(policy_seed) {}

void EnvSlot::start_episode() {
  observation = env.reset(env.sample_target());
  running_return = 0.0;
  running_length = 0;
}

std::vector<EnvSlot> make_env_slots(const EnvFactory& factory, int n_envs, std::uint64_t seed) {
  std::vector<EnvSlot> slots;
  slots.reserve(static_cast<std::size_t>(n_envs));
  for (int i = 0; i < n_envs; ++i) {
    slots.emplace_back(factory(i, derive_seed(seed, 1, static_cast<std::uint64_t>(i))),
                       derive_seed(seed, 2, static_cast<std::uint64_t>(i)));
    slots.back().start_episode();
  }
  return slots;
}

namespace {

void advance_slot(const PolicyParameters& params, EnvSlot& slot, int env, int step,
                  RolloutBuffer& buffer) {
  const std::size_t i = buffer.index(env, step);
  const auto col = static_cast<Eigen::Index>(i);
  const PolicyOutput out = policy_forward(params, slot.observation);
  const SampledAction sampled = sample_action(out.mean, out.log_std, slot.policy_rng);
  buffer.observations.col(col) =
      Eigen::Map<const Eigen::VectorXd>(slot.observation.values.data(), kObsDim);
  buffer.actions(0, col) = sampled.action.qd1;
  buffer.actions(1, col) = sampled.action.qd2;
  buffer.log_probs[i] = sampled.log_prob;
  buffer.values[i] = out.value;

  const StepResult result = slot.env.step(sampled.action);
  buffer.rewards[i] = result.reward;
  buffer.dones[i] = result.terminated ? 1 : 0;
  slot.running_return += result.reward;
  ++slot.running_length;
  if (result.terminated) {
    slot.finished.push_back({slot.running_return, slot.running_length, result.termination_cause});
    slot.start_episode();
  } else {
    slot.observation = result.observation;
  }
}

double bootstrap(const PolicyParameters& params, const EnvSlot& slot) {
  return policy_forward(params, slot.observation).value;
}

}  // namespace

void collect_rollout(const PolicyParameters& params, std::vector<EnvSlot>& slots, int n_steps,
                     RolloutBuffer& buffer, Execution execution) {
  const int n_envs = static_cast<int>(slots.size());
  buffer.allocate(n_envs, n_steps);
  std::vector<double> boot(static_cast<std::size_t>(n_envs));
  if (execution == Execution::serial) {
    for (int step = 0; step < n_steps; ++step) {
      for (int e = 0; e < n_envs; ++e) advance_slot(params, slots[e], e, step, buffer);
    }
    for (int e = 0; e < n_envs; ++e) boot[e] = bootstrap(params, slots[e]);
  } else {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_envs));
#pragma omp parallel for schedule(static)
    for (int e = 0; e < n_envs; ++e) {
      try {
        for (int step = 0; step < n_steps; ++step) advance_slot(params, slots[e], e, step, buffer);
        boot[e] = bootstrap(params, slots[e]);
      } catch (...) {
        errors[e] = std::current_exception();
      }
    }
    for (const auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
  }
  buffer.bootstrap_values = std::move(boot);
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace s2r
