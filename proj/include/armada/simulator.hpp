#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "armada/arm_kinematics.hpp"
#include "armada/rigid_body.hpp"
#include "armada/robot_model.hpp"

namespace armada {

struct SimState {
  BodyState base;
  Eigen::VectorXd q, dq;  // stacked arm joints, arm-major
};

struct SimOptions {
  double baumgarte = 20.0;  // [1/s] dock stabilization bandwidth
  double max_dt = 0.005;    // [s] RK4 substep ceiling
};

/// Articulated whole-body dynamics: floating base plus the arm chains,
/// composite-rigid-body mass matrix and recursive bias in body coordinates.
/// No gravity (orbital free flyer). Docked arms are bilateral 3-DoF point
/// constraints on their tool points, solved with the mass matrix in one KKT
/// system and Baumgarte-stabilized.
class Simulator {
 public:
  explicit Simulator(RobotModel model, SimOptions opt = {});

  const RobotModel& robot() const { return model_; }
  const SimState& state() const { return state_; }
  int joint_count() const { return nj_; }

  void reset(const BodyState& base, const Eigen::VectorXd& q, const Eigen::VectorXd& dq);

  void dock(int arm, const Eigen::Vector3d& world_anchor);
  void release(int arm);
  bool docked(int arm) const { return anchors_[arm].has_value(); }
  const std::optional<Eigen::Vector3d>& anchor(int arm) const { return anchors_[arm]; }

  /// Advances by dt under constant joint torques tau (size joint_count),
  /// body-frame thrust and body-frame external torque on the base. dt is
  /// split into RK4 substeps no longer than max_dt.
  void step(const Eigen::VectorXd& tau, const Eigen::Vector3d& thrust,
            const Eigen::Vector3d& external_torque, double dt);

  Eigen::Vector3d tool_position(int arm) const;
  Eigen::Vector3d tool_velocity(int arm) const;
  /// World-frame point Jacobian of the tool w.r.t. the arm's own joints.
  Eigen::MatrixXd tool_jacobian_world(int arm) const;
  /// Joint slice of one arm inside q / dq / tau vectors.
  int arm_offset(int arm) const { return arm * joints_per_arm_; }
  int joints_per_arm() const { return joints_per_arm_; }

  // Mechanics diagnostics (exact oracles for conservation tests).
  Eigen::Vector3d linear_momentum() const;
  Eigen::Vector3d angular_momentum() const;  // about the world origin
  double kinetic_energy() const;
  Eigen::Vector3d center_of_mass() const;

  Eigen::MatrixXd mass_matrix() const;   // (6+nj) x (6+nj)
  Eigen::VectorXd bias_vector() const;   // C(q, v), size 6+nj

 private:
  struct LinkBody {
    int parent = 0;                // body index
    Eigen::Matrix3d R_fixed;       // child frame orientation in parent frame
    Eigen::Vector3d r_fixed;       // child origin in parent frame
    Eigen::Vector3d axis;          // revolute axis, child frame
    Eigen::Matrix<double, 6, 6> inertia;  // spatial, child frame
  };

  struct Kin {
    std::vector<Eigen::Matrix<double, 6, 6>> Xup;  // parent -> body coords
    std::vector<Eigen::Matrix3d> Rw;               // body -> world rotation
    std::vector<Eigen::Vector3d> ow;               // body origin, world
    std::vector<Eigen::Matrix<double, 6, 1>> v;    // spatial velocity, body coords
    Eigen::VectorXd vfull;                         // [omega_b; v_b body; dq]
  };

  void kinematics(const SimState& s, Kin& k) const;
  Eigen::MatrixXd crba(const Kin& k) const;
  Eigen::VectorXd bias(const Kin& k, std::vector<Eigen::Matrix<double, 6, 1>>* abias) const;
  Eigen::VectorXd accelerations(const SimState& s, const Eigen::VectorXd& tau,
                                const Eigen::Vector3d& thrust,
                                const Eigen::Vector3d& external_torque) const;

  RobotModel model_;
  SimOptions opt_;
  SimState state_;
  int nj_ = 0, joints_per_arm_ = 0;
  std::vector<LinkBody> bodies_;  // [0] = base (parent -1, identity fixed)
  std::vector<std::optional<Eigen::Vector3d>> anchors_;
};

}  // namespace armada
