#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "armada/ocp_solution.hpp"
#include "armada/simulator.hpp"

namespace armada {

enum class ControllerKind { JointPd, DiffIk, Impedance };

struct TrackerOptions {
  ControllerKind kind = ControllerKind::DiffIk;
  double control_rate = 50.0;  // [Hz] task layer: IK targets / impedance refs
  double inner_rate = 200.0;   // [Hz] joint torque layer
  double ik_damping = 0.05;    // DLS damping [m-ish]
  double ik_gain = 4.0;        // [1/s] feedback on tool position error
  double kp = 0.0, kd = 0.0;   // joint PD; 0 uses the model defaults
  Eigen::Vector3d task_kp = Eigen::Vector3d::Constant(400.0);  // impedance [N/m]
  Eigen::Vector3d task_kd = Eigen::Vector3d::Constant(60.0);   // [N s/m]
  bool thruster_feedforward = true;
  SimOptions sim;
};

struct TrackSample {
  double t = 0.0;
  Eigen::Vector3d base_ref, base_sim;
  double base_error = 0.0;
  Eigen::VectorXd ee_error;  // per arm, world frame [m]
};

struct TrackingReport {
  std::string controller;
  double mean_base_error = 0.0, max_base_error = 0.0, final_base_error = 0.0;
  double mean_ee_error = 0.0, max_ee_error = 0.0;
  double mean_attitude_error = 0.0;  // geodesic [rad]
  std::vector<TrackSample> trace;    // at the control rate
};

/// Newton IK with damped least squares, body frame. Returns true on
/// convergence; q is updated in place.
bool ik_solve(const ArmChain& chain, const Eigen::Vector3d& target_body, Eigen::VectorXd& q,
              double damping = 0.05, int max_iters = 200, double tol = 1e-10);

/// Plays a planned trajectory through the articulated simulator. Arms dock at
/// the planned touchdown instants (at the tool's actual position) and release
/// at liftoff. The joint layer is either differential IK with joint PD or
/// task-space impedance with contact-force feedforward and bias compensation.
TrackingReport track_solution(const RobotModel& model, const OcpSolution& sol,
                              const TrackerOptions& opt);

}  // namespace armada
