#pragma once

#include "s2r/robot_model.hpp"
#include "s2r/task_env.hpp"

namespace s2r {

struct IkSolution {
  double q1_star = 0.0;
  double q2_star = 0.0;
  bool reachable = false;
};

// Closed-form inverse kinematics. Unreachable targets are flagged and mapped
// to the nearest point of the reachable shell.
IkSolution solve_ik(const RobotGeometry& geom, const Vec3& target);

inline constexpr double kBaselineGain = 5.0;  // 1/s

// Proportional joint-velocity command toward the IK solution, saturated at
// max_speed; when the remaining error fits in one step the command cancels it
// exactly.
Action baseline_policy(const IkSolution& solution, const RobotState& state, double max_speed,
                       double dt, double gain = kBaselineGain);

Action random_policy(Rng& rng, double max_speed);

}  // namespace s2r
