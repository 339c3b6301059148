#include "s2r/task_env.hpp"

#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "s2r/errors.hpp"

namespace s2r {

std::string_view to_string(Mode mode) {
  return mode == Mode::training ? "training" : "evaluation";
}

std::string_view to_string(TerminationCause cause) {
  switch (cause) {
    case TerminationCause::none: return "none";
    case TerminationCause::floor_collision: return "floor_collision";
    case TerminationCause::joint_limit: return "joint_limit";
    case TerminationCause::horizon: return "horizon";
  }
  return "none";
}

Mode parse_mode(std::string_view text) {
  if (text == "training") return Mode::training;
  if (text == "evaluation") return Mode::evaluation;
  throw ConfigError("unknown episode mode '" + std::string(text) + "'");
}

TerminationCause parse_termination_cause(std::string_view text) {
  for (auto cause : {TerminationCause::none, TerminationCause::floor_collision,
                     TerminationCause::joint_limit, TerminationCause::horizon}) {
    if (to_string(cause) == text) return cause;
  }
  throw ConfigError("unknown termination cause '" + std::string(text) + "'");
}

void EpisodeConfig::validate() const {
  if (horizon <= 0) throw ConfigError("episode horizon must be positive");
  if (!(dt > 0.0)) throw ConfigError("episode dt must be positive");
  if (!(max_speed > 0.0)) throw ConfigError("episode max_speed must be positive");
  if (!(min_target_height >= 0.0)) throw ConfigError("min_target_height must be >= 0");
  mechanical_limits.validate();
  safety_limits.validate();
}

Vec3 sample_target(const RobotGeometry& geom, double min_height, Rng& rng) {
  if (!(min_height < geom.max_height())) {
    throw ConfigError("min_target_height must lie below the top of the reachable shell");
  }
  // On a sphere the height is uniformly distributed (Archimedes), so drawing
  // cos(polar) uniformly on the admissible band is exact rejection sampling.
  const double lowest = std::max(-1.0, (min_height - geom.base_height) / geom.link_length);
  std::uniform_real_distribution<double> height(lowest, 1.0);
  std::uniform_real_distribution<double> azimuth(-std::numbers::pi, std::numbers::pi);
  const double c = height(rng);
  const double phi = azimuth(rng);
  const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  Vec3 p{geom.link_length * s * std::cos(phi), geom.link_length * s * std::sin(phi),
         geom.base_height + geom.link_length * c};
  // Rounding can put a point a hair below the bound at the band edge.
  if (p.z() < min_height) p.z() = min_height;
  return p;
}

double compute_reward(double distance, int t, int horizon, bool terminated_early) {
  if (!terminated_early) return -distance;
  return -distance * static_cast<double>(horizon - t);
}

double episode_return(std::span<const double> rewards) {
  return std::accumulate(rewards.begin(), rewards.end(), 0.0);
}

double shell_distance(const RobotGeometry& geom, const Vec3& target) {
  return std::abs((target - geom.shoulder()).norm() - geom.link_length);
}

Observation make_observation(const RobotGeometry& geom, const Vec3& target, double q1,
                             double q2) {
  const Vec3 offset = target - forward_kinematics(geom, q1, q2);
  return Observation{{offset.x(), offset.y(), offset.z(), q1, q2}};
}

ReachEnv::ReachEnv(RobotGeometry geom, EpisodeConfig config)
    : geom_(geom), config_(config) {
  geom_.validate();
  config_.validate();
}

Observation ReachEnv::reset(const Vec3& target) { return reset_to(target, RobotState{}); }

Observation ReachEnv::reset_to(const Vec3& target, const RobotState& state) {
  if (!target.allFinite()) throw ConfigError("target must be finite");
  target_ = target;
  state_ = state;
  t_ = 0;
  started_ = true;
  terminated_ = false;
  target_unreachable_ = shell_distance(geom_, target) > 1e-6;
  return observation();
}

void ReachEnv::require_running() const {
  if (!started_) throw ProtocolError("step called before reset");
  if (terminated_) throw ProtocolError("step called after the episode terminated");
}

Action ReachEnv::clamp(const Action& action) const {
  return clamp_joint_speed(action, config_.max_speed);
}

RobotState ReachEnv::advance_ideal(const Action& clamped) const {
  return {state_.q1 + config_.dt * clamped.qd1, state_.q2 + config_.dt * clamped.qd2,
          clamped.qd1, clamped.qd2};
}

StepResult ReachEnv::step(const Action& action) {
  require_running();
  return commit(advance_ideal(clamp(action)));
}

StepResult ReachEnv::commit(const RobotState& next) {
  require_running();
  state_ = next;
  const auto& stops = config_.mechanical_limits;
  if (std::abs(state_.q1) > stops.q1_max) {
    state_.q1 = std::copysign(stops.q1_max, state_.q1);
    state_.qd1 = 0.0;
  }
  if (std::abs(state_.q2) > stops.q2_max) {
    state_.q2 = std::copysign(stops.q2_max, state_.q2);
    state_.qd2 = 0.0;
  }
  ++t_;

  StepResult result;
  result.observation = observation();
  const double d = distance();
  const bool fired = config_.mode == Mode::training
                         ? floor_collision(geom_, state_.q1, state_.q2)
                         : joint_safety_violation(config_.safety_limits, state_.q1, state_.q2);
  if (fired) {
    result.termination_cause = config_.mode == Mode::training ? TerminationCause::floor_collision
                                                              : TerminationCause::joint_limit;
  } else if (t_ >= config_.horizon) {
    result.termination_cause = TerminationCause::horizon;
  }
  result.reward = compute_reward(d, t_, config_.horizon, fired);
  result.terminated = result.termination_cause != TerminationCause::none;
  terminated_ = result.terminated;
  return result;
}

double ReachEnv::distance() const {
  return (target_ - forward_kinematics(geom_, state_.q1, state_.q2)).norm();
}

Observation ReachEnv::observation() const {
  return make_observation(geom_, target_, state_.q1, state_.q2);
}

TraceWriter::TraceWriter(std::ostream& out) : out_(&out) {
  *out_ << "step,q1,q2,dx,dy,dz,reward,termination_cause\n";
}

void TraceWriter::write(int step, const StepResult& result) {
  const auto& o = result.observation;
  *out_ << step << ',' << o.q1() << ',' << o.q2() << ',' << o.dx() << ',' << o.dy() << ','
        << o.dz() << ',' << result.reward << ',' << to_string(result.termination_cause) << '\n';
}

}  // namespace s2r
