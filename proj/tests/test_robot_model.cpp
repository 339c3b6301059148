#include <doctest.h>

#include <cmath>
#include <random>

#include "s2r/errors.hpp"
#include "s2r/ik_baseline.hpp"
#include "s2r/robot_model.hpp"

using namespace s2r;

TEST_CASE("forward kinematics at reference poses") {
  const RobotGeometry g;
  CHECK((forward_kinematics(g, 0.0, 0.0) - Vec3(0.0, 0.0, 1.306)).norm() < 1e-15);
  CHECK((forward_kinematics(g, 0.0, std::numbers::pi / 2) - Vec3(0.946, 0.0, 0.36)).norm() < 1e-15);
  CHECK((forward_kinematics(g, std::numbers::pi / 2, std::numbers::pi / 2) - Vec3(0.0, 0.946, 0.36)).norm() < 1e-15);
  // pointing straight down
  CHECK((forward_kinematics(g, 0.3, std::numbers::pi) - Vec3(0.0, 0.0, 0.36 - 0.946)).norm() < 1e-15);
}

TEST_CASE("end effector stays on the sphere about the shoulder") {
  const RobotGeometry g;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int i = 0; i < 10000; ++i) {
    const Vec3 p = forward_kinematics(g, u(rng), u(rng));
    CHECK(std::abs((p - Vec3(0, 0, 0.36)).norm() - 0.946) < 1e-12);
  }
}

TEST_CASE("floor collision boundary counts") {
  const RobotGeometry g;
  // z = d1 + d2 cos q2 = clearance
  const double q2 = std::acos((g.floor_clearance - g.base_height) / g.link_length);
  CHECK(floor_collision(g, 0.0, q2 + 1e-9));
  CHECK_FALSE(floor_collision(g, 0.0, q2 - 1e-6));
  CHECK_FALSE(floor_collision(g, 0.0, 0.0));
}

TEST_CASE("safety limits fire at the boundary") {
  const auto lim = JointLimits::evaluation_safety();
  CHECK(joint_safety_violation(lim, deg_to_rad(150.0), 0.0));
  CHECK(joint_safety_violation(lim, 0.0, -deg_to_rad(100.0)));
  CHECK_FALSE(joint_safety_violation(lim, deg_to_rad(149.999), deg_to_rad(99.999)));
}

TEST_CASE("joint speed clamp") {
  const double m = std::numbers::pi / 9;
  CHECK(clamp_joint_speed({-2.0, 2.0}, m) == Action{-m, m});
  CHECK(clamp_joint_speed({0.1, -0.2}, 1.0) == Action{0.1, -0.2});
}

TEST_CASE("angle wrapping is into (-pi, pi]") {
  CHECK(wrap_angle(std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(wrap_angle(-std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(wrap_angle(3 * std::numbers::pi / 2) == doctest::Approx(-std::numbers::pi / 2));
}

TEST_CASE("geometry and limit validation") {
  RobotGeometry g;
  g.link_length = 0.0;
  CHECK_THROWS_AS(g.validate(), ConfigError);
  JointLimits l{-1.0, 1.0};
  CHECK_THROWS_AS(l.validate(), ConfigError);
}

TEST_CASE("inverse kinematics round trip") {
  const RobotGeometry g;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> q1d(-3.0, 3.0), q2d(0.01, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 p = forward_kinematics(g, q1d(rng), q2d(rng));
    const IkSolution s = solve_ik(g, p);
    CHECK(s.reachable);
    CHECK((forward_kinematics(g, s.q1_star, s.q2_star) - p).norm() < 1e-9);
  }
}

TEST_CASE("inverse kinematics on degenerate and unreachable targets") {
  const RobotGeometry g;
  const IkSolution top = solve_ik(g, {0.0, 0.0, 1.306});
  CHECK(top.reachable);
  CHECK(top.q1_star == 0.0);
  CHECK(std::abs(top.q2_star) < 1e-7);
  const IkSolution far = solve_ik(g, {2.0, 0.0, 0.36});
  CHECK_FALSE(far.reachable);
  CHECK(far.q1_star == doctest::Approx(0.0));
  CHECK(far.q2_star == doctest::Approx(std::numbers::pi / 2));
}

TEST_CASE("baseline controller branches") {
  const double m = std::numbers::pi / 9;
  const IkSolution s{0.5, 0.0, true};
  CHECK(baseline_policy(s, {}, m, 0.02) == Action{m, 0.0});
  const IkSolution small{0.001, 0.0, true};
  const Action a = baseline_policy(small, {}, m, 0.02);
  CHECK(a.qd1 == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(a.qd2 == 0.0);
  // proportional branch between dead-beat and saturation
  const IkSolution mid{0.05, -0.05, true};
  const Action p = baseline_policy(mid, {}, m, 0.02);
  CHECK(p.qd1 == doctest::Approx(0.25));
  CHECK(p.qd2 == doctest::Approx(-0.25));
}
