#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "armada/quaternion.hpp"
#include "armada/robot_model.hpp"

namespace armada {

/// Centroidal state of the vehicle base.
struct BodyState {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();   // inertial [m]
  Quaternion attitude;                                   // body -> inertial
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();    // inertial [m/s]
  Eigen::Vector3d omega = Eigen::Vector3d::Zero();       // body frame [rad/s]
};

/// Signed thruster command, body frame [N]. One channel per axis; the six
/// physical non-negative channels are the positive/negative parts.
using ThrusterCommand = Eigen::Vector3d;

/// External disturbance torque, body frame [N m].
using ExternalTorque = Eigen::Vector3d;

struct BaseAccel {
  Eigen::Vector3d linear;   // inertial [m/s^2]
  Eigen::Vector3d angular;  // body frame [rad/s^2]
};

/// Splits a signed thruster command into the six non-negative channels
/// ordered (+x, -x, +y, -y, +z, -z).
Eigen::Matrix<double, 6, 1> split_thruster(const ThrusterCommand& u);
ThrusterCommand merge_thruster(const Eigen::Matrix<double, 6, 1>& channels);

/// Centroidal dynamics: linear from the force balance, angular from the Euler
/// equation in the body frame. Contact forces f_i and their application
/// points p_i are inertial-frame quantities; the thrust acts at the center of
/// mass in body axes (no torque contribution); T_e is a body-frame torque.
BaseAccel base_dynamics(const BodyState& state,
                        const std::vector<Eigen::Vector3d>& contact_forces,
                        const std::vector<Eigen::Vector3d>& contact_points,
                        const ThrusterCommand& thrust,
                        const ExternalTorque& external_torque,
                        const RobotModel& model);

/// Single fixed-step RK4 step treating the given accelerations as constant
/// over the step. The quaternion is advanced through its rate equation and
/// renormalized afterwards.
BodyState integrate_state(const BodyState& state, const BaseAccel& acc, double dt);

/// Force system acting on the base at a given time, for closed-loop
/// integration of the centroidal dynamics.
struct BaseForceSystem {
  std::function<void(double t, std::vector<Eigen::Vector3d>& forces,
                     std::vector<Eigen::Vector3d>& points)> contacts;
  std::function<ThrusterCommand(double t)> thrust;
  std::function<ExternalTorque(double t)> external_torque;
};

/// Fixed-step RK4 over the coupled kinematics + dynamics, re-evaluating the
/// force system and the Euler coupling at every stage. Returns the state at
/// t0 + steps*dt.
BodyState integrate_base_trajectory(BodyState state, double t0, double dt, int steps,
                                    const BaseForceSystem& system, const RobotModel& model,
                                    const std::function<void(double, const BodyState&)>& observer = {});

}  // namespace armada
