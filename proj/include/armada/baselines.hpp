#pragma once

namespace armada::baselines {

// Mean base tracking error of the classical controllers on the 1.2 m
// surface-locomotion task, used as reference lines in the track summary.
inline constexpr double kDiffIkMeanBaseError = 9.2e-2;     // [m]
inline constexpr double kImpedanceMeanBaseError = 7.6e-2;  // [m]

// Learned-policy tracking references for the same tasks.
inline constexpr double kPolicyMeanBaseErrorCase1 = 1.5e-2;  // [m]
inline constexpr double kPolicyMeanBaseErrorCase2 = 2.5e-2;  // [m]
inline constexpr double kPolicyMeanToolError = 6.7e-3;       // [m]

}  // namespace armada::baselines
