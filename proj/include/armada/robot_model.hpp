#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "armada/quaternion.hpp"

namespace armada {

/// One rigid link of an arm chain.
struct LinkParams {
  std::string name;
  double mass = 0.0;        // [kg]
  double length = 0.0;      // [m], along the link's local x toward the next joint
  Eigen::Vector3d inertia;  // [kg m^2] principal moments about the link COM
};

/// One joint of a serial chain: a fixed transform (translation then fixed
/// rotation, both in the predecessor frame) followed by a revolute rotation
/// about `axis` in the resulting frame.
struct JointParams {
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  Eigen::Vector3d fixed_rpy = Eigen::Vector3d::Zero();
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
};

struct ArmChain {
  Eigen::Vector3d mount;   // body frame [m]
  double mount_yaw = 0.0;  // rotation of the chain root about body z [rad]
  std::vector<JointParams> joints;
  Eigen::Vector3d tool_offset = Eigen::Vector3d::Zero();  // last frame -> tool point
  std::vector<LinkParams> links;  // one per joint (the moving bodies)
};

/// Planner- and simulator-facing description of the vehicle.
///
/// The planner uses the lumped fields (total mass, centroidal inertia, nominal
/// tool offsets, kinematic boxes); the simulator additionally walks the chains.
struct RobotModel {
  double total_mass = 0.0;         // [kg] everything, base plus arms
  double body_mass = 0.0;          // [kg] central body alone
  Eigen::Vector3d body_half_extents;  // [m] central box half sizes
  Eigen::Matrix3d inertia;         // [kg m^2] lumped centroidal, nominal posture
  double arm_base_mass = 0.0;      // [kg] per-arm non-moving pedestal, folded into the body
  Eigen::Vector3d arm_base_inertia = Eigen::Vector3d::Zero();

  std::vector<ArmChain> arms;                 // zeta entries
  std::vector<Eigen::Vector3d> nominal_tool;  // p_ni, body frame; equals FK(0)
  Eigen::Vector3d box_half_extents;           // xi_i, shared across arms

  double thruster_limit = 0.0;       // [N] per signed axis
  Eigen::VectorXd torque_limit;      // [N m] per joint of one arm
  double joint_limit = 0.0;          // [rad] symmetric position limit
  double kp_default = 100.0;         // PD defaults [N m/rad], [N m s/rad]
  double kd_default = 5.0;

  int arm_count() const { return static_cast<int>(arms.size()); }
  int joints_per_arm() const { return arms.empty() ? 0 : static_cast<int>(arms[0].joints.size()); }
  Eigen::Matrix3d inertia_inverse() const { return inertia.inverse(); }
};

/// Loads and validates a model file. Throws std::runtime_error on schema
/// violations, on non-disjoint kinematic boxes and when the stored nominal
/// tool points disagree with FK of the zero configuration beyond 1e-9.
RobotModel load_robot_model(const std::string& path);

}  // namespace armada
