#include "s2r/robot_model.hpp"

#include <algorithm>
#include <cmath>

#include "s2r/errors.hpp"

namespace s2r {

void RobotGeometry::validate() const {
  if (!(base_height > 0.0) || !(link_length > 0.0)) {
    throw ConfigError("robot geometry: base_height and link_length must be positive");
  }
  if (!(base_height + link_length > 0.1)) {
    throw ConfigError("robot geometry: base_height + link_length must exceed 0.1 m");
  }
  if (!std::isfinite(floor_z) || !(floor_clearance >= 0.0)) {
    throw ConfigError("robot geometry: floor_z must be finite and floor_clearance >= 0");
  }
}

void JointLimits::validate() const {
  constexpr double pi = std::numbers::pi;
  if (!(q1_max > 0.0 && q1_max <= pi) || !(q2_max > 0.0 && q2_max <= pi)) {
    throw ConfigError("joint limits must lie in (0, pi]");
  }
}

Vec3 forward_kinematics(const RobotGeometry& geom, double q1, double q2) {
  const double reach = geom.link_length * std::sin(q2);
  return {reach * std::cos(q1), reach * std::sin(q1),
          geom.base_height + geom.link_length * std::cos(q2)};
}

bool floor_collision(const RobotGeometry& geom, double q1, double q2) {
  return forward_kinematics(geom, q1, q2).z() <= geom.floor_z + geom.floor_clearance;
}

bool joint_safety_violation(const JointLimits& limits, double q1, double q2) {
  return std::abs(q1) >= limits.q1_max || std::abs(q2) >= limits.q2_max;
}

Action clamp_joint_speed(const Action& action, double max_speed) {
  return {std::clamp(action.qd1, -max_speed, max_speed),
          std::clamp(action.qd2, -max_speed, max_speed)};
}

double wrap_angle(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double wrapped = std::remainder(angle, two_pi);
  if (wrapped <= -std::numbers::pi) wrapped += two_pi;
  return wrapped;
}

}  // namespace s2r
