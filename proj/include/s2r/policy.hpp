#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "s2r/mlp.hpp"

namespace s2r {

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

// Actor-critic weights: a Gaussian policy head with state-independent
// log standard deviation and a separate value network.
struct PolicyParameters {
  Mlp actor;   // 5 -> hidden -> 2 (action means)
  Eigen::Vector2d log_std = Eigen::Vector2d::Zero();
  Mlp critic;  // 5 -> hidden -> 1

  static PolicyParameters initialize(std::span<const int> hidden, double log_std_init, Rng& rng);
  static PolicyParameters zeros(std::span<const int> hidden);
  PolicyParameters zeros_like() const;

  void validate() const;
  bool all_finite() const;
  std::size_t parameter_count() const;

  // Flat view used by the optimizer: actor, log_std, critic.
  Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd& flat);

  friend bool operator==(const PolicyParameters& a, const PolicyParameters& b);
};

struct PolicyOutput {
  Eigen::Vector2d mean;
  Eigen::Vector2d log_std;
  double value = 0.0;
};

PolicyOutput policy_forward(const PolicyParameters& params, const Observation& obs);

// Deterministic action (the Gaussian mean).
Action policy_mean_action(const PolicyParameters& params, const Observation& obs);

struct SampledAction {
  Action action;
  double log_prob = 0.0;
};

SampledAction sample_action(const Eigen::Vector2d& mean, const Eigen::Vector2d& log_std, Rng& rng);

double gaussian_log_prob(const Eigen::Vector2d& mean, const Eigen::Vector2d& log_std,
                         const Eigen::Vector2d& x);

// Entropy of the diagonal Gaussian.
double gaussian_entropy(const Eigen::Vector2d& log_std);

// Portable checkpoint: "S2RB", u16 version, actor layers, log_std, critic
// layers, CRC32. All integers and floats little-endian; each layer is stored
// as the augmented row-major matrix [W | b].
inline constexpr std::uint16_t kCheckpointVersion = 1;

std::vector<unsigned char> encode_checkpoint(const PolicyParameters& params);
PolicyParameters decode_checkpoint(std::span<const unsigned char> bytes);
void save_checkpoint(const std::filesystem::path& path, const PolicyParameters& params);
PolicyParameters load_checkpoint(const std::filesystem::path& path);

}  // namespace s2r
