#pragma once

#include <vector>

#include "s2r/eval.hpp"
#include "s2r/strategies.hpp"

namespace s2r {

// Relative performance change anchored to the random agent:
// (R_rand - R_ideal) / |R_ideal - R_random_policy|.
double degradation(double randomized_return, double ideal_return, double random_policy_return);

inline constexpr double kCalibrationTolerance = 0.10;

struct SweepPoint {
  Range range;
  double mean_return = 0.0;
  double degradation = 0.0;
  bool passed = false;
};

struct CalibrationResult {
  RandParam parameter = RandParam::L;
  double ideal_return = 0.0;
  double random_policy_return = 0.0;
  std::vector<SweepPoint> sweep;  // stops at the first failure
  Range widest;                   // last passing range
};

// Range at sweep step k: latency [0, 0.05k] s, noise [0, 0.01k], torque
// stiffness and damping [max(1, 100 - 5k), 100]. Step 0 is the unrandomized
// reference.
Range sweep_range(RandParam parameter, int step);
int max_sweep_steps(RandParam parameter);

// Widens one parameter's range from zero while the ideal-trained agent stays
// within 10% of its unrandomized return.
CalibrationResult calibrate(const EvalAgent& ideal_agent, RandParam parameter,
                            const RobotGeometry& geom, const EvalProtocol& protocol,
                            std::uint64_t seed, Execution execution = Execution::parallel);

}  // namespace s2r
