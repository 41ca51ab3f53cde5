#pragma once

#include <Eigen/Core>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "armada/controllers.hpp"
#include "armada/heightmap.hpp"
#include "armada/ocp_solution.hpp"
#include "armada/simulator.hpp"

namespace armada {

/// Reward weights and regularization.
struct RewardWeights {
  double body = 20.0;
  double ee = 15.0;
  double eps = 1e-5;
  double power = -2.5e-2;
  double acc = -1e-6;
  double bacc = -1e-2;
  double act = -1e-2;
  double thruster = -1e-2;
  double collision = -1.0;
  double body_collision = -200.0;
};

struct RandomizationRanges {
  double base_position = 0.2;   // [m] uniform, per component
  double joint_position = 0.1;  // [rad] uniform, per joint
  double joint_fraction = 0.25; // +- fraction of the default posture value
  double mass_fraction = 0.1;   // +- fraction of every body mass
};

struct NoiseRanges {
  bool enabled = true;
  double base_position = 0.025;     // [m]
  double base_orientation = 0.02;   // [rad], roll/pitch/yaw perturbation
  double linear_velocity = 0.05;    // [m/s]
  double angular_velocity = 0.05;   // [rad/s]
  double joint_position = 0.02;     // [rad]
  double joint_velocity = 0.1;      // [rad/s]
};

struct CurriculumConfig {
  double trigger = 0.05;            // [m] mean base error that unlocks growth
  double expansion = 0.10;          // [m] growth per unlock
  double initial_base_range = 0.0;  // [m] base-target sampling range at start
  double ee_sphere = 0.2;           // [m] EE target sampling sphere radius
};

struct EnvConfig {
  double control_rate = 50.0;   // [Hz]
  int substeps = 4;             // inner steps per policy step (200 Hz)
  double episode_seconds = 15.0;
  RewardWeights weights;
  RandomizationRanges randomization;
  NoiseRanges noise;
  CurriculumConfig curriculum;
  Eigen::Vector3d nominal_base_position = Eigen::Vector3d(0.0, 0.0, 0.8);
  Eigen::Vector3d nominal_base_rpy = Eigen::Vector3d::Zero();
  Eigen::VectorXd default_posture;            // per joint of one arm
  std::vector<double> target_change_times = {5.0, 10.0};
  double ground_z = 0.0;  // flat terrain under the robot

  int steps_to_timeout() const { return static_cast<int>(episode_seconds * control_rate + 0.5); }
};

EnvConfig load_env_config(const std::string& path);

struct RewardBreakdown {
  double body = 0.0, ee = 0.0;
  double power = 0.0, acc = 0.0, bacc = 0.0, act = 0.0, thruster = 0.0;
  double collision = 0.0, body_collision = 0.0;
  double total = 0.0;  // always the left-to-right sum of the fields above
};

/// Raw quantities the reward is a pure function of.
struct RewardInputs {
  Eigen::Vector3d base_position_desired, base_position;
  Quaternion base_attitude_desired, base_attitude;
  std::vector<Eigen::Vector3d> ee_position_desired, ee_position;
  std::vector<Quaternion> ee_attitude_desired, ee_attitude;
  Eigen::VectorXd dq, tau, ddq;         // stacked joints
  Eigen::Vector3d base_linear_accel = Eigen::Vector3d::Zero();
  Eigen::Vector3d base_angular_accel = Eigen::Vector3d::Zero();
  Eigen::VectorXd action_delta;         // q* change since the previous step
  Eigen::Vector3d thrust = Eigen::Vector3d::Zero();
  int arm_collisions = 0;
  bool body_collision = false;
  int joints_per_arm = 6;
};

RewardBreakdown evaluate_reward(const RewardWeights& w, const RewardInputs& in);

struct EnvTransition {
  Eigen::VectorXd observation;
  RewardBreakdown reward;
  bool terminated = false;  // body collision
  bool truncated = false;   // episode timeout
  int step_index = 0;
  double time = 0.0;
};

/// Pose-tracking MDP over the articulated simulator.
///
/// Observation layout (151 for four 6-joint arms):
///   [0..12]    base position (3), attitude quaternion wxyz (4),
///              linear velocity (3), body angular velocity (3)
///   [13..19]   desired base position (3) and attitude (4)
///   [20..20+N) joint positions, then joint velocities (N = total joints)
///   [..]       previous action (N+3)
///   [..]       current EE poses, per arm: position (3) + quaternion (4)
///   [..]       desired EE poses, same layout
/// Action: joint position targets (N) plus a signed body-frame thruster
/// command (3). Each policy step runs `substeps` PD/simulation substeps.
class Env {
 public:
  Env(RobotModel model, EnvConfig cfg, uint64_t seed = 0);

  int observation_size() const;
  int action_size() const;

  Eigen::VectorXd reset();
  Eigen::VectorXd reset(uint64_t seed);
  /// Deterministic reset to an explicit state with nominal mass and no
  /// randomization; targets start at the current pose.
  Eigen::VectorXd reset_to(const BodyState& base, const Eigen::VectorXd& q);
  EnvTransition step(const Eigen::VectorXd& action);

  /// Grows the base-target range by one expansion iff the mean error beats
  /// the trigger. Returns the (possibly unchanged) range. Never shrinks.
  double curriculum_update(double mean_base_error);
  double base_target_range() const { return base_range_; }

  const Simulator& simulator() const { return sim_; }
  const EnvConfig& config() const { return cfg_; }
  double system_mass() const { return mass_scale_ * model_.total_mass; }
  int steps_taken() const { return step_count_; }
  bool episode_over() const { return terminated_ || truncated_; }

  /// Overrides the sampled targets (used by plan-following rollouts).
  void set_base_target(const Eigen::Vector3d& pos, const Quaternion& att);
  void set_ee_target(int arm, const Eigen::Vector3d& pos, const Quaternion& att);

  Eigen::VectorXd observation(bool with_noise);

 private:
  void sample_targets(bool ee_only);
  void detect_collisions(int* arm_hits, bool* body_hit) const;

  RobotModel model_;
  EnvConfig cfg_;
  HeightMap map_;
  Simulator sim_;
  std::mt19937_64 rng_;
  double mass_scale_ = 1.0;
  double base_range_;
  int step_count_ = 0;
  bool terminated_ = false, truncated_ = false, was_reset_ = false;
  Eigen::VectorXd prev_action_;
  Eigen::Vector3d base_target_pos_;
  Quaternion base_target_att_;
  std::vector<Eigen::Vector3d> ee_target_pos_;
  std::vector<Quaternion> ee_target_att_;
  std::vector<double> pending_target_changes_;
};

using Policy = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Batch of independent, individually seeded instances.
class BatchEnv {
 public:
  BatchEnv(const RobotModel& model, const EnvConfig& cfg, const std::vector<uint64_t>& seeds);
  int size() const { return static_cast<int>(envs_.size()); }
  Env& at(int i) { return envs_[i]; }
  std::vector<Eigen::VectorXd> reset_all();
  std::vector<EnvTransition> step_all(const std::vector<Eigen::VectorXd>& actions);

 private:
  std::vector<Env> envs_;
};

/// Feeds planner targets to a policy step by step and aggregates errors.
TrackingReport policy_rollout(Env& env, const Policy& policy, const OcpSolution& sol);

}  // namespace armada
