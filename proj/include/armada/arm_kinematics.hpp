#pragma once

#include <Eigen/Core>
#include <vector>

#include "armada/rigid_body.hpp"
#include "armada/robot_model.hpp"

namespace armada {

struct Pose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + position; }
  Pose compose(const Pose& o) const { return {rotation * o.position + position, rotation * o.rotation}; }
};

/// Frames of every joint of one arm plus the tool, all in the body frame.
struct ArmFrames {
  std::vector<Pose> joint;   // frame after each joint's rotation
  std::vector<Eigen::Vector3d> axis_world;  // joint axis in the body frame
  Pose tool;
};

/// FK of one arm in the BODY frame.
ArmFrames arm_frames(const ArmChain& chain, const Eigen::VectorXd& q);

/// Tool position in the body frame.
Eigen::Vector3d tool_position(const ArmChain& chain, const Eigen::VectorXd& q);

/// Tool pose in the inertial frame given the base pose.
Pose forward_kinematics(const ArmChain& chain, const Eigen::VectorXd& q, const BodyState& base);

/// 3 x n positional Jacobian of the tool point w.r.t. the joint vector, in the
/// body frame (base held fixed).
Eigen::Matrix<double, 3, Eigen::Dynamic> tool_jacobian(const ArmChain& chain,
                                                       const Eigen::VectorXd& q);

/// 6 x n geometric Jacobian (angular on top), body frame.
Eigen::Matrix<double, 6, Eigen::Dynamic> tool_jacobian6(const ArmChain& chain,
                                                        const Eigen::VectorXd& q);

/// Damped-least-squares solve dq = J^T (J J^T + lambda^2 I)^-1 err.
Eigen::VectorXd damped_least_squares(const Eigen::Matrix<double, 3, Eigen::Dynamic>& jac,
                                     const Eigen::Vector3d& err, double damping);

}  // namespace armada
