#pragma once

#include <Eigen/Core>
#include <numbers>

namespace s2r {

using Vec3 = Eigen::Vector3d;

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

// Two active joints of the arm: joint 1 yaws about the vertical axis, joint 2
// pitches the straight remainder of the arm. q2 = 0 is upright.
struct RobotGeometry {
  double base_height = 0.36;   // floor to joint-2 axis [m]
  double link_length = 0.946;  // joint-2 axis to end-effector [m]
  double floor_z = 0.0;
  double floor_clearance = 0.01;

  // Throws ConfigError.
  void validate() const;
  Vec3 shoulder() const { return {0.0, 0.0, base_height}; }
  double max_height() const { return base_height + link_length; }
};

struct RobotState {
  double q1 = 0.0;
  double q2 = 0.0;
  double qd1 = 0.0;
  double qd2 = 0.0;
};

// Symmetric bounds on |q1| and |q2|.
struct JointLimits {
  double q1_max;
  double q2_max;

  void validate() const;

  // Bounds that end an evaluation episode (mechanical limit minus 20 deg).
  static JointLimits evaluation_safety() { return {deg_to_rad(150.0), deg_to_rad(100.0)}; }
  static JointLimits mechanical() { return {deg_to_rad(170.0), deg_to_rad(120.0)}; }
};

struct Action {
  double qd1 = 0.0;
  double qd2 = 0.0;

  friend bool operator==(const Action&, const Action&) = default;
};

Vec3 forward_kinematics(const RobotGeometry& geom, double q1, double q2);

// Point-contact proxy: the end-effector is within `floor_clearance` of the
// floor plane. The boundary counts as a collision.
bool floor_collision(const RobotGeometry& geom, double q1, double q2);

bool joint_safety_violation(const JointLimits& limits, double q1, double q2);

Action clamp_joint_speed(const Action& action, double max_speed);

// Wraps an angle into (-pi, pi]. Reporting only; dynamics never wrap.
double wrap_angle(double angle);

}  // namespace s2r
