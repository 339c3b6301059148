#include "s2r/ik_baseline.hpp"

#include <algorithm>
#include <cmath>

namespace s2r {

IkSolution solve_ik(const RobotGeometry& geom, const Vec3& target) {
  IkSolution s;
  const Vec3 rel = target - geom.shoulder();
  // Project onto the shell along the ray from the joint-2 axis.
  const double r = rel.norm();
  const double cos_q2 = r > 0.0 ? std::clamp(rel.z() / r, -1.0, 1.0) : 1.0;
  s.q2_star = std::acos(cos_q2);
  s.q1_star = (target.x() == 0.0 && target.y() == 0.0) ? 0.0 : std::atan2(target.y(), target.x());
  s.reachable = std::abs(r - geom.link_length) < 1e-6;
  return s;
}

Action baseline_policy(const IkSolution& solution, const RobotState& state, double max_speed,
                       double dt, double gain) {
  auto command = [&](double goal, double q) {
    const double error = goal - q;
    if (std::abs(error) <= dt * max_speed) return error / dt;
    return std::clamp(gain * error, -max_speed, max_speed);
  };
  return {command(solution.q1_star, state.q1), command(solution.q2_star, state.q2)};
}

Action random_policy(Rng& rng, double max_speed) {
  std::uniform_real_distribution<double> u(-max_speed, max_speed);
  const double a = u(rng);
  const double b = u(rng);
  return {a, b};
}

}  // namespace s2r
