#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "s2r/policy.hpp"

namespace s2r {

struct TrainConfig {
  int n_envs = 64;
  int n_steps_per_update = 256;  // per environment
  double clip_range = 0.1;
  double gamma = 0.8;
  double gae_lambda = 0.9;
  double learning_rate = 3e-4;
  bool linear_lr_decay = false;
  int epochs_per_update = 10;
  int minibatch_size = 64;
  long long total_timesteps = 0;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  double max_grad_norm = 0.5;
  double adam_epsilon = 1e-5;
  std::vector<int> hidden_sizes{64, 64};
  double log_std_init = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// Generalized advantage estimation over one environment's trajectory slice.
// dones[t] marks that the episode ended with step t.
GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const std::uint8_t> dones, double bootstrap_value, double gamma,
                      double lambda);

// Per-sample clipped surrogate min(r A, clip(r, 1-eps, 1+eps) A).
double clipped_surrogate(double ratio, double advantage, double clip_range);

// In place: zero mean, unit (population) standard deviation, eps = 1e-8.
void normalize_advantages(std::span<double> advantages);

// Training samples, one per column.
struct Minibatch {
  Eigen::MatrixXd observations;  // 5 x B
  Eigen::MatrixXd actions;       // 2 x B
  Eigen::VectorXd old_log_probs;
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;

  Eigen::Index size() const { return observations.cols(); }
};

struct LossTerms {
  double total = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
};

// Minimized objective
//   -mean(clipped surrogate) + value_coef * MSE(V, returns) - entropy_coef * H.
// When `grad` is non-null it receives the exact gradient (reverse mode).
LossTerms ppo_loss(const PolicyParameters& params, const Minibatch& batch, const TrainConfig& cfg,
                   PolicyParameters* grad);

// Bias-corrected first/second moment adaptive descent.
struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long long step = 0;
};

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& state,
               double learning_rate, double epsilon, double beta1 = 0.9, double beta2 = 0.999);

// Rescales `grad` to norm `max_norm` when larger. Returns the original norm.
double clip_grad_norm(Eigen::VectorXd& grad, double max_norm);

// Samples indexed [env * n_steps + step].
struct RolloutBuffer {
  int n_envs = 0;
  int n_steps = 0;
  Eigen::MatrixXd observations;  // 5 x N
  Eigen::MatrixXd actions;       // 2 x N
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<std::uint8_t> dones;
  std::vector<double> bootstrap_values;  // per env
  std::vector<double> advantages;
  std::vector<double> returns;

  void allocate(int envs, int steps);
  void clear();
  std::size_t size() const { return rewards.size(); }
  bool full() const { return size() > 0 && bootstrap_values.size() == static_cast<std::size_t>(n_envs); }
  std::size_t index(int env, int step) const {
    return static_cast<std::size_t>(env) * n_steps + step;
  }
  void compute_advantages(double gamma, double lambda);
  Minibatch gather(std::span<const std::size_t> indices) const;

  friend bool operator==(const RolloutBuffer&, const RolloutBuffer&) = default;
};

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  int gradient_steps = 0;
};

// One PPO update over a full buffer. Throws NumericalError, leaving `params`
// and `adam` untouched, if any parameter turns non-finite.
UpdateStats ppo_update(PolicyParameters& params, AdamState& adam, RolloutBuffer& buffer,
                       const TrainConfig& cfg, double learning_rate, Rng& rng);

}  // namespace s2r
