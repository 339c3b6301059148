#include "s2r/calibration.hpp"

#include <algorithm>
#include <cmath>

namespace s2r {

double degradation(double randomized_return, double ideal_return, double random_policy_return) {
  const double span = std::abs(ideal_return - random_policy_return);
  if (span == 0.0) return randomized_return == ideal_return ? 0.0 : -INFINITY;
  return (randomized_return - ideal_return) / span;
}

Range sweep_range(RandParam parameter, int step) {
  switch (parameter) {
    case RandParam::L: return {0.0, 0.05 * step};
    case RandParam::N: return {0.0, 0.01 * step};
    case RandParam::T: return {std::max(1.0, 100.0 - 5.0 * step), 100.0};
  }
  return {};
}

int max_sweep_steps(RandParam parameter) {
  switch (parameter) {
    case RandParam::L: return 40;  // up to 2 s
    case RandParam::N: return 50;  // up to 50 %
    case RandParam::T: return 20;  // down to [1, 100]
  }
  return 0;
}

namespace {

RandomizationConfig single(RandParam parameter, const Range& r, int step) {
  RandomizationConfig cfg;
  if (step == 0) return cfg;
  switch (parameter) {
    case RandParam::L:
      cfg.latency_enabled = true;
      cfg.latency = r;
      break;
    case RandParam::N:
      cfg.noise_enabled = true;
      cfg.noise = r;
      break;
    case RandParam::T:
      cfg.torque_enabled = true;
      cfg.stiffness = r;
      cfg.damping = r;
      break;
  }
  return cfg;
}

}  // namespace

CalibrationResult calibrate(const EvalAgent& ideal_agent, RandParam parameter,
                            const RobotGeometry& geom, const EvalProtocol& protocol,
                            std::uint64_t seed, Execution execution) {
  CalibrationResult result;
  result.parameter = parameter;
  result.ideal_return =
      evaluate_randomized(ideal_agent, RandomizationConfig::none(), seed, geom, protocol, execution)
          .mean_return();
  const RandomAgent random(derive_seed(seed, 13), protocol.max_speed);
  result.random_policy_return =
      evaluate_randomized(random, RandomizationConfig::none(), seed, geom, protocol, execution)
          .mean_return();

  for (int step = 0; step <= max_sweep_steps(parameter); ++step) {
    const Range r = sweep_range(parameter, step);
    SweepPoint point{r, result.ideal_return, 0.0, true};
    if (step > 0) {
      point.mean_return = evaluate_randomized(ideal_agent, single(parameter, r, step), seed, geom,
                                              protocol, execution)
                              .mean_return();
      point.degradation = degradation(point.mean_return, result.ideal_return, result.random_policy_return);
      point.passed = point.degradation >= -kCalibrationTolerance;
    }
    result.sweep.push_back(point);
    if (!point.passed) break;
    result.widest = r;
  }
  return result;
}

}  // namespace s2r
