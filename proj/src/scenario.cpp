#include "armada/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace armada {

namespace {

using nlohmann::json;

Eigen::Vector3d vec3(const json& j, const std::string& key) {
  if (!j.contains(key)) throw std::runtime_error("scenario: missing vector '" + key + "'");
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 3)
    throw std::runtime_error("scenario: '" + key + "' must be an array of 3 numbers");
  return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

PoseSpec pose(const json& j, const std::string& key) {
  if (!j.contains(key)) throw std::runtime_error("scenario: missing pose '" + key + "'");
  PoseSpec p;
  p.position = vec3(j.at(key), "position");
  if (j.at(key).contains("rpy")) p.rpy = vec3(j.at(key), "rpy");
  return p;
}

HeightMap parse_map(const json& j) {
  if (!j.contains("map")) return HeightMap::flat(0.0);
  const auto& m = j.at("map");
  const std::string kind = m.value("kind", "flat");
  if (kind == "flat") return HeightMap::flat(m.value("height", 0.0));
  if (kind == "plane")
    return HeightMap::plane(m.value("height", 0.0), m.value("gx", 0.0), m.value("gy", 0.0));
  if (kind == "grid") {
    const Eigen::Vector2d origin{m.at("origin")[0].get<double>(), m.at("origin")[1].get<double>()};
    const double cell = m.at("cell").get<double>();
    const int nx = m.at("nx").get<int>(), ny = m.at("ny").get<int>();
    std::vector<double> h = m.at("heights").get<std::vector<double>>();
    if (static_cast<int>(h.size()) != nx * ny)
      throw std::runtime_error("scenario: grid heights size must equal nx*ny");
    return HeightMap::grid(origin, cell, nx, ny, std::move(h));
  }
  throw std::runtime_error("scenario: unknown map kind '" + kind + "'");
}

std::string resolve(const std::filesystem::path& base_dir, const std::string& ref) {
  namespace fs = std::filesystem;
  const fs::path p{ref};
  if (p.is_absolute() || fs::exists(p)) return p.string();
  return (base_dir / p).string();
}

}  // namespace

ControllerKind controller_from_name(const std::string& name) {
  if (name == "pd") return ControllerKind::JointPd;
  if (name == "diffik") return ControllerKind::DiffIk;
  if (name == "impedance") return ControllerKind::Impedance;
  throw std::runtime_error("unknown controller '" + name + "' (pd|diffik|impedance)");
}

std::string controller_name(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::JointPd: return "pd";
    case ControllerKind::DiffIk: return "diffik";
    default: return "impedance";
  }
}

ScenarioConfig load_scenario(const std::string& path) {
  namespace fs = std::filesystem;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("scenario: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("scenario: parse error in '" + path + "': " + e.what());
  }

  const fs::path base_dir = fs::path(path).parent_path();
  ScenarioConfig sc;
  sc.name = j.value("name", fs::path(path).stem().string());

  if (!j.contains("model")) throw std::runtime_error("scenario: missing 'model' reference");
  sc.model_path = resolve(base_dir, j.at("model").get<std::string>());
  if (!fs::exists(sc.model_path))
    throw std::runtime_error("scenario: model file not found: " + sc.model_path);
  sc.model = load_robot_model(sc.model_path);

  sc.map = parse_map(j);

  sc.ocp.start = pose(j, "start");
  sc.ocp.goal = pose(j, "goal");
  if (!j.contains("duration")) throw std::runtime_error("scenario: missing 'duration'");
  sc.ocp.duration = j.at("duration").get<double>();
  sc.ocp.contact_phases = j.value("contact_phases", 4);
  sc.ocp.thruster_segments = j.value("thruster_segments", 4);
  sc.ocp.polys = j.value("polys", 3);
  sc.ocp.defect_nodes = j.value("defect_nodes", 5);
  sc.ocp.path_nodes = j.value("path_nodes", 3);
  if (j.contains("weights")) {
    const auto& w = j.at("weights");
    if (w.contains("force")) sc.ocp.sigma_force = vec3(w, "force");
    if (w.contains("velocity")) sc.ocp.sigma_velocity = vec3(w, "velocity");
    sc.ocp.sigma_angular = w.value("angular", sc.ocp.sigma_angular);
  }
  sc.ocp.clearance = j.value("clearance", sc.ocp.clearance);
  sc.ocp.swing_lift = j.value("swing_lift", sc.ocp.swing_lift);
  sc.ocp.thrusters = j.value("thrusters", true);
  sc.ocp.start_in_contact = j.value("start_in_contact", true);
  sc.ocp.approach_duration = j.value("approach_duration", sc.ocp.approach_duration);
  if (sc.ocp.duration <= 0.0) throw std::runtime_error("scenario: duration must be positive");
  if (sc.ocp.contact_phases < 1) throw std::runtime_error("scenario: contact_phases must be >= 1");
  if (sc.ocp.polys < 1) throw std::runtime_error("scenario: polys must be >= 1");

  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    sc.solver.eq_tol = s.value("eq_tol", sc.solver.eq_tol);
    sc.solver.ineq_tol = s.value("ineq_tol", sc.solver.ineq_tol);
    sc.solver.stat_tol = s.value("stat_tol", sc.solver.stat_tol);
    sc.solver.penalty0 = s.value("penalty0", sc.solver.penalty0);
    sc.solver.penalty_growth = s.value("penalty_growth", sc.solver.penalty_growth);
    sc.solver.max_outer = s.value("max_outer", sc.solver.max_outer);
    sc.solver.max_inner = s.value("max_inner", sc.solver.max_inner);
    sc.solver.wall_limit = s.value("wall_limit", sc.solver.wall_limit);
    sc.solver.verbose = s.value("verbose", sc.solver.verbose);
  }

  if (j.contains("tracker")) {
    const auto& t = j.at("tracker");
    if (t.contains("controller"))
      sc.tracker.kind = controller_from_name(t.at("controller").get<std::string>());
    sc.tracker.control_rate = t.value("control_rate", sc.tracker.control_rate);
    sc.tracker.inner_rate = t.value("inner_rate", sc.tracker.inner_rate);
    sc.tracker.ik_damping = t.value("ik_damping", sc.tracker.ik_damping);
    sc.tracker.ik_gain = t.value("ik_gain", sc.tracker.ik_gain);
    sc.tracker.kp = t.value("kp", sc.tracker.kp);
    sc.tracker.kd = t.value("kd", sc.tracker.kd);
    if (t.contains("task_kp")) sc.tracker.task_kp = vec3(t, "task_kp");
    if (t.contains("task_kd")) sc.tracker.task_kd = vec3(t, "task_kd");
    sc.tracker.thruster_feedforward = t.value("thruster_feedforward", true);
    if (sc.tracker.control_rate <= 0.0 || sc.tracker.inner_rate < sc.tracker.control_rate)
      throw std::runtime_error("scenario: tracker rates must satisfy 0 < control_rate <= inner_rate");
  }

  if (j.contains("env")) {
    sc.env_path = resolve(base_dir, j.at("env").get<std::string>());
    if (!fs::exists(sc.env_path))
      throw std::runtime_error("scenario: env config not found: " + sc.env_path);
  }
  sc.output_dir = j.value("output", sc.output_dir);
  sc.seed = j.value("seed", 0u);
  return sc;
}

}  // namespace armada
