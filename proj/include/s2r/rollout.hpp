#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "s2r/ppo.hpp"
#include "s2r/randomization.hpp"

namespace s2r {

// Derives an independent 64-bit stream seed from a base seed and labels.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index = 0);

using EnvFactory = std::function<RandomizedEnv(int env_index, std::uint64_t seed)>;

struct EpisodeSummary {
  double episode_return = 0.0;
  int length = 0;
  TerminationCause cause = TerminationCause::none;
};

// One training environment with its own policy-sampling stream and the
// running episode.
struct EnvSlot {
  RandomizedEnv env;
  Rng policy_rng;
  Observation observation;
  double running_return = 0.0;
  int running_length = 0;
  std::vector<EpisodeSummary> finished;  // since the last collection

  EnvSlot(RandomizedEnv e, std::uint64_t policy_seed);
  void start_episode();
};

std::vector<EnvSlot> make_env_slots(const EnvFactory& factory, int n_envs, std::uint64_t seed);

enum class Execution { serial, parallel };

// Fills `buffer` with `n_steps` transitions from every slot. The serial path
// walks step-major across environments; the parallel path runs each
// environment's trajectory on its own thread. Both yield identical buffers.
void collect_rollout(const PolicyParameters& params, std::vector<EnvSlot>& slots, int n_steps,
                     RolloutBuffer& buffer, Execution execution = Execution::parallel);

// Threads used by the parallel kernels (1 when built without OpenMP).
int max_threads();

}  // namespace s2r
