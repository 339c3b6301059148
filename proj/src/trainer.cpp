#include "s2r/trainer.hpp"

#include <algorithm>

namespace s2r {

PolicyParameters initial_parameters(const TrainConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, 0));
  return PolicyParameters::initialize(cfg.hidden_sizes, cfg.log_std_init, rng);
}

PolicyParameters train_loop(const EnvFactory& make_env, const TrainConfig& cfg,
                            PolicyParameters init, const TrainOptions& options) {
  cfg.validate();
  init.validate();
  PolicyParameters params = std::move(init);
  const MeasurementPlan* plan = options.measurement;
  auto measure = [&](long long at) {
    if (plan == nullptr || !plan->evaluate) return;
    const CurvePoint point{at, plan->evaluate(params)};
    if (options.sink != nullptr) options.sink->on_measurement(point);
  };
  if (plan != nullptr && plan->measure_at_start) measure(options.timestep_offset);
  if (cfg.total_timesteps == 0) return params;

  std::vector<EnvSlot> slots = make_env_slots(make_env, cfg.n_envs, cfg.seed);
  Rng shuffle_rng(derive_seed(cfg.seed, 3));
  AdamState adam;
  RolloutBuffer buffer;
  long long consumed = 0;
  int update = 0;
  while (consumed < cfg.total_timesteps) {
    const long long remaining = cfg.total_timesteps - consumed;
    const int steps = static_cast<int>(
        std::min<long long>(cfg.n_steps_per_update, (remaining + cfg.n_envs - 1) / cfg.n_envs));
    collect_rollout(params, slots, steps, buffer, options.execution);

    UpdateRecord record;
    double return_sum = 0.0;
    for (auto& slot : slots) {
      for (const auto& ep : slot.finished) {
        return_sum += ep.episode_return;
        ++record.episodes;
        ++record.termination_counts[static_cast<int>(ep.cause)];
      }
      slot.finished.clear();
    }
    record.mean_return = record.episodes > 0 ? return_sum / record.episodes : 0.0;

    const double progress = static_cast<double>(consumed) / static_cast<double>(cfg.total_timesteps);
    const double lr = cfg.linear_lr_decay ? cfg.learning_rate * (1.0 - progress) : cfg.learning_rate;
    buffer.compute_advantages(cfg.gamma, cfg.gae_lambda);
    record.losses = ppo_update(params, adam, buffer, cfg, lr, shuffle_rng);

    const long long before = options.timestep_offset + consumed;
    consumed += static_cast<long long>(steps) * cfg.n_envs;
    const long long after = options.timestep_offset + consumed;
    record.update_index = update++;
    record.timesteps = after;
    if (options.sink != nullptr) options.sink->on_update(record);

    if (plan != nullptr && plan->every > 0) {
      const long long first = (before / plan->every + 1) * plan->every;
      bool measured = false;
      double value = 0.0;
      for (long long at = first; at <= after; at += plan->every) {
        if (!measured) {
          value = plan->evaluate(params);
          measured = true;
        }
        if (options.sink != nullptr) options.sink->on_measurement({at, value});
      }
    }
  }
  return params;
}

}  // namespace s2r
