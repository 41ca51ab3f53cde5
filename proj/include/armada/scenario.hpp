#pragma once

#include <string>

#include "armada/controllers.hpp"
#include "armada/heightmap.hpp"
#include "armada/nlp_solver.hpp"
#include "armada/ocp_problem.hpp"
#include "armada/robot_model.hpp"

namespace armada {

/// Everything a planning or tracking run needs, loaded from one JSON file.
/// Referenced files (robot model, optional environment config) are resolved
/// relative to the scenario file's directory and must exist at load time.
struct ScenarioConfig {
  std::string name;
  std::string model_path;
  std::string env_path;  // empty when the scenario sets none
  std::string output_dir = "out";

  RobotModel model;
  HeightMap map = HeightMap::flat(0.0);
  OcpConfig ocp;
  SolverOptions solver;
  TrackerOptions tracker;
  unsigned seed = 0;
};

/// Parses and validates a scenario file. Throws std::runtime_error with a
/// descriptive message on schema violations or missing referenced files.
ScenarioConfig load_scenario(const std::string& path);

ControllerKind controller_from_name(const std::string& name);
std::string controller_name(ControllerKind kind);

}  // namespace armada
