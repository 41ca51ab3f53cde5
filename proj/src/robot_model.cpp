#include "armada/robot_model.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "armada/arm_kinematics.hpp"

namespace armada {

namespace {

using nlohmann::json;

Eigen::Vector3d vec3(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::runtime_error("model: expected 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

LinkParams link_params(const json& j) {
  LinkParams l;
  l.name = j.at("name").get<std::string>();
  l.mass = j.at("mass").get<double>();
  l.length = j.at("length").get<double>();
  l.inertia = vec3(j.at("inertia"));
  if (!(l.mass > 0.0)) throw std::runtime_error("model: link mass must be positive");
  return l;
}

}  // namespace

RobotModel load_robot_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("model: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("model: parse failure in " + path + ": " + e.what());
  }

  RobotModel m;
  try {
    m.total_mass = j.at("total_mass").get<double>();
    m.body_mass = j.at("body").at("mass").get<double>();
    m.body_half_extents = vec3(j.at("body").at("half_extents"));
    m.inertia = vec3(j.at("inertia")).asDiagonal();
    m.arm_base_mass = j.at("arm_base").at("mass").get<double>();
    m.arm_base_inertia = vec3(j.at("arm_base").at("inertia"));
    m.box_half_extents = vec3(j.at("box_half_extents"));
    m.thruster_limit = j.at("thruster_limit").get<double>();
    m.joint_limit = j.at("joint_limit").get<double>();
    m.kp_default = j.at("pd").at("kp").get<double>();
    m.kd_default = j.at("pd").at("kd").get<double>();

    const json& tl = j.at("torque_limit");
    m.torque_limit.resize(tl.size());
    for (std::size_t k = 0; k < tl.size(); ++k) m.torque_limit(k) = tl[k].get<double>();

    std::vector<JointParams> joints;
    for (const json& js : j.at("joints")) {
      JointParams p;
      p.translation = vec3(js.at("translation"));
      p.fixed_rpy = vec3(js.at("fixed_rpy"));
      p.axis = vec3(js.at("axis"));
      joints.push_back(p);
    }
    std::vector<LinkParams> links;
    for (const json& jl : j.at("links")) links.push_back(link_params(jl));
    if (links.size() != joints.size())
      throw std::runtime_error("model: per-joint link table size mismatch");
    const Eigen::Vector3d tool_offset = vec3(j.at("tool_offset"));

    for (const json& jm : j.at("mounts")) {
      ArmChain chain;
      chain.mount = vec3(jm.at("position"));
      chain.mount_yaw = jm.at("yaw").get<double>();
      chain.joints = joints;
      chain.links = links;
      chain.tool_offset = tool_offset;
      m.arms.push_back(chain);
    }
    for (const json& jn : j.at("nominal_tool")) m.nominal_tool.push_back(vec3(jn));
  } catch (const json::exception& e) {
    throw std::runtime_error("model: schema violation in " + path + ": " + e.what());
  }

  if (m.arms.empty()) throw std::runtime_error("model: needs at least one arm");
  if (m.nominal_tool.size() != m.arms.size())
    throw std::runtime_error("model: nominal_tool count does not match mounts");
  if (!(m.total_mass > 0.0) || !(m.body_mass > 0.0))
    throw std::runtime_error("model: masses must be positive");
  if (m.torque_limit.size() != static_cast<Eigen::Index>(m.arms[0].joints.size()))
    throw std::runtime_error("model: torque_limit length does not match joint count");

  double arm_mass = m.arm_base_mass;
  for (const LinkParams& l : m.arms[0].links) arm_mass += l.mass;
  const double assembled = m.body_mass + arm_mass * static_cast<double>(m.arms.size());
  if (std::abs(assembled - m.total_mass) > 1e-6)
    throw std::runtime_error("model: body + arm masses do not add up to total_mass");

  // nominal tool points are FK of the zero configuration
  const Eigen::VectorXd q0 = Eigen::VectorXd::Zero(m.joints_per_arm());
  for (int i = 0; i < m.arm_count(); ++i) {
    const Eigen::Vector3d fk = tool_position(m.arms[i], q0);
    if ((fk - m.nominal_tool[i]).norm() > 1e-9)
      throw std::runtime_error("model: nominal_tool disagrees with zero-configuration FK");
  }

  // reachable boxes must not overlap between arms
  for (int a = 0; a < m.arm_count(); ++a) {
    for (int b = a + 1; b < m.arm_count(); ++b) {
      const Eigen::Vector3d d = (m.nominal_tool[a] - m.nominal_tool[b]).cwiseAbs();
      const bool disjoint = (d.array() >= 2.0 * m.box_half_extents.array()).any();
      if (!disjoint) throw std::runtime_error("model: kinematic boxes overlap between arms");
    }
  }
  return m;
}

}  // namespace armada
