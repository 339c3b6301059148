#include "s2r/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "s2r/errors.hpp"

namespace s2r {

void TrainConfig::validate() const {
  if (n_envs <= 0 || n_steps_per_update <= 0) {
    throw ConfigError("n_envs and n_steps_per_update must be positive");
  }
  if (!(clip_range > 0.0 && clip_range < 1.0)) throw ConfigError("clip_range must lie in (0, 1)");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw ConfigError("gae_lambda must lie in [0, 1]");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (epochs_per_update <= 0 || minibatch_size <= 0) {
    throw ConfigError("epochs_per_update and minibatch_size must be positive");
  }
  if ((static_cast<long long>(n_envs) * n_steps_per_update) % minibatch_size != 0) {
    throw ConfigError("n_envs * n_steps_per_update must be divisible by minibatch_size");
  }
  if (total_timesteps < 0) throw ConfigError("total_timesteps must be >= 0");
  if (!(value_coef >= 0.0) || !(entropy_coef >= 0.0) || !(max_grad_norm > 0.0)) {
    throw ConfigError("value_coef, entropy_coef must be >= 0 and max_grad_norm > 0");
  }
  if (!(adam_epsilon > 0.0)) throw ConfigError("adam_epsilon must be positive");
  if (hidden_sizes.empty() ||
      std::any_of(hidden_sizes.begin(), hidden_sizes.end(), [](int h) { return h <= 0; })) {
    throw ConfigError("hidden_sizes must be a non-empty list of positive widths");
  }
  if (!(log_std_init >= kLogStdMin && log_std_init <= kLogStdMax)) {
    throw ConfigError("log_std_init must lie in [-20, 2]");
  }
}

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const std::uint8_t> dones, double bootstrap_value, double gamma,
                      double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) {
    throw ShapeError("compute_gae: rewards, values and dones must have equal length");
  }
  GaeResult out{std::vector<double>(n), std::vector<double>(n)};
  double next_advantage = 0.0;
  double next_value = bootstrap_value;
  for (std::size_t k = n; k-- > 0;) {
    const double live = dones[k] ? 0.0 : 1.0;
    const double delta = rewards[k] + gamma * next_value * live - values[k];
    next_advantage = delta + gamma * lambda * live * next_advantage;
    out.advantages[k] = next_advantage;
    out.returns[k] = next_advantage + values[k];
    next_value = values[k];
  }
  return out;
}

double clipped_surrogate(double ratio, double advantage, double clip_range) {
  const double clipped = std::clamp(ratio, 1.0 - clip_range, 1.0 + clip_range);
  return std::min(ratio * advantage, clipped * advantage);
}

void normalize_advantages(std::span<double> advantages) {
  if (advantages.empty()) return;
  const double n = static_cast<double>(advantages.size());
  const double mean = std::accumulate(advantages.begin(), advantages.end(), 0.0) / n;
  double var = 0.0;
  for (double a : advantages) var += (a - mean) * (a - mean);
  const double scale = 1.0 / (std::sqrt(var / n) + 1e-8);
  for (double& a : advantages) a = (a - mean) * scale;
}

LossTerms ppo_loss(const PolicyParameters& params, const Minibatch& batch, const TrainConfig& cfg,
                   PolicyParameters* grad) {
  const Eigen::Index b = batch.size();
  if (b == 0) throw ShapeError("empty minibatch");
  const double inv_b = 1.0 / static_cast<double>(b);

  Mlp::Tape actor_tape;
  Mlp::Tape critic_tape;
  const Eigen::MatrixXd means = params.actor.forward(batch.observations, actor_tape);
  const Eigen::MatrixXd values = params.critic.forward(batch.observations, critic_tape);

  const Eigen::Array2d inv_std = (-params.log_std.array()).exp();
  const Eigen::ArrayXXd z = (batch.actions - means).array().colwise() * inv_std;  // 2 x B
  const double log_norm = params.log_std.sum() + std::log(2.0 * std::numbers::pi);
  const Eigen::ArrayXd log_probs = -0.5 * z.square().colwise().sum().transpose() - log_norm;
  const Eigen::ArrayXd ratios = (log_probs - batch.old_log_probs.array()).exp();

  LossTerms terms;
  Eigen::ArrayXd dloss_dlogp(b);
  double surrogate_sum = 0.0;
  int clipped = 0;
  for (Eigen::Index j = 0; j < b; ++j) {
    const double a = batch.advantages[j];
    const double r = ratios[j];
    const double rc = std::clamp(r, 1.0 - cfg.clip_range, 1.0 + cfg.clip_range);
    const bool unclipped_active = r * a <= rc * a;
    surrogate_sum += unclipped_active ? r * a : rc * a;
    dloss_dlogp[j] = unclipped_active ? -inv_b * a * r : 0.0;
    if (std::abs(r - 1.0) > cfg.clip_range) ++clipped;
  }
  const Eigen::ArrayXd value_err = values.row(0).transpose().array() - batch.returns.array();

  terms.policy_loss = -surrogate_sum * inv_b;
  terms.value_loss = value_err.square().mean();
  terms.entropy = gaussian_entropy(params.log_std);
  terms.clip_fraction = static_cast<double>(clipped) * inv_b;
  terms.total = terms.policy_loss + cfg.value_coef * terms.value_loss - cfg.entropy_coef * terms.entropy;

  if (grad != nullptr) {
    *grad = params.zeros_like();
    // d logp / d mean = z / sigma ; d logp / d log_std = z^2 - 1.
    const Eigen::MatrixXd grad_means =
        ((z.colwise() * inv_std).rowwise() * dloss_dlogp.transpose()).matrix();
    params.actor.backward(actor_tape, grad_means, grad->actor);
    const Eigen::Array2d dlogstd =
        ((z.square() - 1.0).rowwise() * dloss_dlogp.transpose()).rowwise().sum();
    grad->log_std = dlogstd.matrix() - Eigen::Vector2d::Constant(cfg.entropy_coef);
    const Eigen::MatrixXd grad_values =
        (2.0 * cfg.value_coef * inv_b * value_err).matrix().transpose();
    params.critic.backward(critic_tape, grad_values, grad->critic);
  }
  return terms;
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& state,
               double learning_rate, double epsilon, double beta1, double beta2) {
  if (state.m.size() != params.size()) {
    state.m = Eigen::VectorXd::Zero(params.size());
    state.v = Eigen::VectorXd::Zero(params.size());
    state.step = 0;
  }
  ++state.step;
  state.m = beta1 * state.m + (1.0 - beta1) * grad;
  state.v = beta2 * state.v + (1.0 - beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  params.array() -= learning_rate * (state.m.array() / c1) /
                    ((state.v.array() / c2).sqrt() + epsilon);
}

double clip_grad_norm(Eigen::VectorXd& grad, double max_norm) {
  const double norm = grad.norm();
  if (norm > max_norm) grad *= max_norm / (norm + 1e-6);
  return norm;
}

void RolloutBuffer::allocate(int envs, int steps) {
  n_envs = envs;
  n_steps = steps;
  const auto n = static_cast<std::size_t>(envs) * steps;
  observations.setZero(kObsDim, static_cast<Eigen::Index>(n));
  actions.setZero(kActDim, static_cast<Eigen::Index>(n));
  log_probs.assign(n, 0.0);
  rewards.assign(n, 0.0);
  values.assign(n, 0.0);
  dones.assign(n, 0);
  bootstrap_values.clear();
  advantages.clear();
  returns.clear();
}

void RolloutBuffer::clear() { allocate(0, 0); }

void RolloutBuffer::compute_advantages(double gamma, double lambda) {
  if (!full()) throw ProtocolError("advantages requested for an incomplete rollout buffer");
  advantages.assign(size(), 0.0);
  returns.assign(size(), 0.0);
  for (int e = 0; e < n_envs; ++e) {
    const std::size_t at = index(e, 0);
    const auto len = static_cast<std::size_t>(n_steps);
    const auto gae = compute_gae(std::span(rewards).subspan(at, len), std::span(values).subspan(at, len),
                                 std::span(dones).subspan(at, len), bootstrap_values[e], gamma, lambda);
    std::copy(gae.advantages.begin(), gae.advantages.end(), advantages.begin() + at);
    std::copy(gae.returns.begin(), gae.returns.end(), returns.begin() + at);
  }
}

Minibatch RolloutBuffer::gather(std::span<const std::size_t> indices) const {
  const auto b = static_cast<Eigen::Index>(indices.size());
  Minibatch mb{Eigen::MatrixXd(kObsDim, b), Eigen::MatrixXd(kActDim, b), Eigen::VectorXd(b),
               Eigen::VectorXd(b), Eigen::VectorXd(b)};
  for (Eigen::Index j = 0; j < b; ++j) {
    const auto i = static_cast<Eigen::Index>(indices[j]);
    mb.observations.col(j) = observations.col(i);
    mb.actions.col(j) = actions.col(i);
    mb.old_log_probs[j] = log_probs[i];
    mb.advantages[j] = advantages[i];
    mb.returns[j] = returns[i];
  }
  return mb;
}

UpdateStats ppo_update(PolicyParameters& params, AdamState& adam, RolloutBuffer& buffer,
                       const TrainConfig& cfg, double learning_rate, Rng& rng) {
  if (!buffer.full()) throw ProtocolError("ppo_update requires a fully populated buffer");
  if (buffer.advantages.size() != buffer.size()) buffer.compute_advantages(cfg.gamma, cfg.gae_lambda);
  normalize_advantages(buffer.advantages);

  PolicyParameters work = params;
  AdamState moments = adam;
  Eigen::VectorXd flat = work.flatten();
  std::vector<std::size_t> order(buffer.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  UpdateStats stats;
  for (int epoch = 0; epoch < cfg.epochs_per_update; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.minibatch_size) {
      const std::size_t len = std::min<std::size_t>(cfg.minibatch_size, order.size() - start);
      const Minibatch mb = buffer.gather(std::span(order).subspan(start, len));
      PolicyParameters grad;
      const LossTerms terms = ppo_loss(work, mb, cfg, &grad);
      Eigen::VectorXd g = grad.flatten();
      if (!std::isfinite(terms.total) || !g.allFinite()) {
        throw NumericalError("non-finite loss or gradient during PPO update");
      }
      clip_grad_norm(g, cfg.max_grad_norm);
      adam_step(flat, g, moments, learning_rate, cfg.adam_epsilon);
      work.assign(flat);
      work.log_std = work.log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
      flat.segment(static_cast<Eigen::Index>(work.actor.parameter_count()), 2) = work.log_std;

      stats.policy_loss += terms.policy_loss;
      stats.value_loss += terms.value_loss;
      stats.entropy += terms.entropy;
      stats.clip_fraction += terms.clip_fraction;
      ++stats.gradient_steps;
    }
  }
  if (!work.all_finite()) throw NumericalError("PPO update produced non-finite parameters");
  params = std::move(work);
  adam = std::move(moments);
  if (stats.gradient_steps > 0) {
    const double n = stats.gradient_steps;
    stats.policy_loss /= n;
    stats.value_loss /= n;
    stats.entropy /= n;
    stats.clip_fraction /= n;
  }
  return stats;
}

}  // namespace s2r
