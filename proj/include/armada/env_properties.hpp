#pragma once

#include <string>
#include <vector>

#include "armada/env.hpp"

namespace armada {

struct PropertyResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Environment contract checks: reward monotonicity and breakdown summation,
/// observation noise bounds, reset randomization bounds, episode accounting,
/// action clamping, curriculum rule, and seeded determinism. Pure function of
/// the model, the config and the seed.
std::vector<PropertyResult> run_env_property_suite(const RobotModel& model, const EnvConfig& cfg,
                                                   uint64_t seed = 0, int noise_samples = 100000);

bool all_pass(const std::vector<PropertyResult>& results);

}  // namespace armada
