#include "armada/arm_kinematics.hpp"

#include <Eigen/Dense>
#include <stdexcept>

namespace armada {

namespace {

Eigen::Matrix3d rpy_matrix(const Eigen::Vector3d& rpy) {
  return Quaternion::from_euler_zyx(rpy).rotation();
}

Eigen::Matrix3d axis_rotation(const Eigen::Vector3d& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

}  // namespace

ArmFrames arm_frames(const ArmChain& chain, const Eigen::VectorXd& q) {
  if (q.size() != static_cast<Eigen::Index>(chain.joints.size()))
    throw std::invalid_argument("arm_frames: joint vector length mismatch");

  ArmFrames out;
  Pose frame{chain.mount, axis_rotation(Eigen::Vector3d::UnitZ(), chain.mount_yaw)};
  for (std::size_t k = 0; k < chain.joints.size(); ++k) {
    const JointParams& j = chain.joints[k];
    frame = frame.compose({j.translation, rpy_matrix(j.fixed_rpy)});
    out.axis_world.push_back(frame.rotation * j.axis.normalized());
    frame = frame.compose({Eigen::Vector3d::Zero(), axis_rotation(j.axis, q(k))});
    out.joint.push_back(frame);
  }
  out.tool = frame.compose({chain.tool_offset, Eigen::Matrix3d::Identity()});
  return out;
}

Eigen::Vector3d tool_position(const ArmChain& chain, const Eigen::VectorXd& q) {
  return arm_frames(chain, q).tool.position;
}

Pose forward_kinematics(const ArmChain& chain, const Eigen::VectorXd& q, const BodyState& base) {
  const Pose local = arm_frames(chain, q).tool;
  const Eigen::Matrix3d rb = base.attitude.rotation();
  return {rb * local.position + base.position, rb * local.rotation};
}

Eigen::Matrix<double, 3, Eigen::Dynamic> tool_jacobian(const ArmChain& chain,
                                                       const Eigen::VectorXd& q) {
  const ArmFrames f = arm_frames(chain, q);
  const int n = static_cast<int>(chain.joints.size());
  Eigen::Matrix<double, 3, Eigen::Dynamic> jac(3, n);
  for (int k = 0; k < n; ++k) {
    const Eigen::Vector3d arm = f.tool.position - f.joint[k].position;
    jac.col(k) = f.axis_world[k].cross(arm);
  }
  return jac;
}

Eigen::Matrix<double, 6, Eigen::Dynamic> tool_jacobian6(const ArmChain& chain,
                                                        const Eigen::VectorXd& q) {
  const ArmFrames f = arm_frames(chain, q);
  const int n = static_cast<int>(chain.joints.size());
  Eigen::Matrix<double, 6, Eigen::Dynamic> jac(6, n);
  for (int k = 0; k < n; ++k) {
    const Eigen::Vector3d arm = f.tool.position - f.joint[k].position;
    jac.block<3, 1>(0, k) = f.axis_world[k];
    jac.block<3, 1>(3, k) = f.axis_world[k].cross(arm);
  }
  return jac;
}

Eigen::VectorXd damped_least_squares(const Eigen::Matrix<double, 3, Eigen::Dynamic>& jac,
                                     const Eigen::Vector3d& err, double damping) {
  Eigen::Matrix3d g = jac * jac.transpose();
  g.diagonal().array() += damping * damping;
  return jac.transpose() * g.ldlt().solve(err);
}

}  // namespace armada
