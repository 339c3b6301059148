#include "s2r/randomization.hpp"

#include <cmath>
#include <string>

#include "s2r/errors.hpp"

namespace s2r {
namespace {

void check_range(const Range& r, const char* name) {
  if (!(std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo >= 0.0 && r.lo <= r.hi)) {
    throw ConfigError(std::string("randomization range '") + name + "' must satisfy 0 <= lo <= hi");
  }
}

}  // namespace

void RandomizationConfig::validate() const {
  check_range(latency, "latency");
  check_range(stiffness, "stiffness");
  check_range(damping, "damping");
  check_range(noise, "noise");
}

double draw_uniform(const Range& range, Rng& rng) {
  if (range.lo == range.hi) return range.lo;
  return std::uniform_real_distribution<double>(range.lo, range.hi)(rng);
}

void LatencyState::reset(const Observation& initial) {
  history_.assign(1, initial);
  t_prev_ = 0.0;
  last_output_ = initial;
}

void LatencyState::record(int t, const Observation& ideal) {
  if (t != static_cast<int>(history_.size())) {
    throw ProtocolError("latency history must be recorded for consecutive steps");
  }
  history_.push_back(ideal);
}

Observation LatencyState::apply(int t, double latency, double dt) {
  if (t < 0 || t >= static_cast<int>(history_.size())) {
    throw ProtocolError("latency lookup beyond the recorded history");
  }
  const double effective = std::max(0.0, static_cast<double>(t) - latency / dt);
  if (effective < t_prev_) return last_output_;

  const auto lower = static_cast<std::size_t>(std::floor(effective));
  const auto upper = static_cast<std::size_t>(std::ceil(effective));
  const double w = effective - static_cast<double>(lower);
  Observation out = history_[lower];
  if (upper != lower) {
    for (std::size_t i = 0; i < kObsDim; ++i) {
      out[i] = (1.0 - w) * history_[lower][i] + w * history_[upper][i];
    }
  }
  t_prev_ = effective;
  last_output_ = out;
  return out;
}

RobotState step_torque_dynamics(TorqueParams& params, const RobotState& state,
                                const Action& command, double dt) {
  const double ks = params.stiffness;
  const double kd = params.damping;
  const double denom = 1.0 + dt * kd + dt * dt * ks;
  auto advance = [&](double q, double qd, double qd_cmd, double& q_cmd) {
    q_cmd += dt * qd_cmd;
    const double qd_next = (qd + dt * ks * (q_cmd - q) + dt * kd * qd_cmd) / denom;
    return std::pair{q + dt * qd_next, qd_next};
  };
  const auto [q1, qd1] = advance(state.q1, state.qd1, command.qd1, params.integrated_command[0]);
  const auto [q2, qd2] = advance(state.q2, state.qd2, command.qd2, params.integrated_command[1]);
  return {q1, q2, qd1, qd2};
}

Observation apply_noise(const Observation& obs, double level, Rng& rng) {
  std::uniform_real_distribution<double> u(-level, level);
  Observation out;
  for (std::size_t i = 0; i < kObsDim; ++i) out[i] = obs[i] * (1.0 + u(rng));
  return out;
}

Action apply_noise(const Action& action, double level, Rng& rng) {
  std::uniform_real_distribution<double> u(-level, level);
  const double f1 = 1.0 + u(rng);
  const double f2 = 1.0 + u(rng);
  return {action.qd1 * f1, action.qd2 * f2};
}

TorqueParams draw_episode_params(const RandomizationConfig& config, Rng& rng) {
  if (!config.torque_enabled) {
    throw ConfigError("torque parameters requested with torque randomization disabled");
  }
  TorqueParams params;
  params.stiffness = draw_uniform(config.stiffness, rng);
  params.damping = draw_uniform(config.damping, rng);
  return params;
}

RandomizedEnv::RandomizedEnv(RobotGeometry geom, EpisodeConfig episode,
                             RandomizationConfig config, std::uint64_t seed)
    : env_(geom, episode), config_(config), rng_(seed) {
  config_.validate();
}

Vec3 RandomizedEnv::sample_target() {
  return s2r::sample_target(env_.geometry(), env_.config().min_target_height, rng_);
}

Observation RandomizedEnv::reset(const Vec3& target) { return reset_to(target, RobotState{}); }

Observation RandomizedEnv::reset_to(const Vec3& target, const RobotState& state) {
  const Observation ideal = env_.reset_to(target, state);
  if (config_.torque_enabled) {
    torque_ = draw_episode_params(config_, rng_);
    torque_.integrated_command = {state.q1, state.q2};
  }
  if (config_.latency_enabled) latency_.reset(ideal);
  return observe(ideal, 0, draw_noise_level());
}

double RandomizedEnv::draw_noise_level() {
  return config_.noise_enabled ? draw_uniform(config_.noise, rng_) : 0.0;
}

Observation RandomizedEnv::observe(const Observation& ideal, int t, double noise_level) {
  Observation out = ideal;
  if (config_.latency_enabled) {
    if (t > 0) latency_.record(t, ideal);
    out = latency_.apply(t, draw_uniform(config_.latency, rng_), env_.config().dt);
  }
  if (config_.noise_enabled) out = apply_noise(out, noise_level, rng_);
  return out;
}

StepResult RandomizedEnv::step(const Action& action) {
  if (env_.terminated()) throw ProtocolError("step called after the episode terminated");
  const double level = draw_noise_level();
  const Action noisy = config_.noise_enabled ? apply_noise(action, level, rng_) : action;
  const Action clamped = env_.clamp(noisy);
  const RobotState next =
      config_.torque_enabled
          ? step_torque_dynamics(torque_, env_.state(), clamped, env_.config().dt)
          : env_.advance_ideal(clamped);
  StepResult result = env_.commit(next);
  result.observation = observe(result.observation, env_.t(), level);
  return result;
}

RandomizedEnv compose(RobotGeometry geom, EpisodeConfig episode, const RandomizationConfig& config,
                      std::uint64_t seed) {
  return RandomizedEnv(geom, episode, config, seed);
}

}  // namespace s2r
