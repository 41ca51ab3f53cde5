#pragma once

#include <Eigen/Core>
#include <array>
#include <string>
#include <utility>
#include <vector>

#include "armada/contact_schedule.hpp"
#include "armada/nlp_solver.hpp"
#include "armada/ocp_problem.hpp"
#include "armada/phase_spline.hpp"

namespace armada {

/// Decoded trajectory: per-channel phase splines plus the optimized schedule.
struct OcpSolution {
  OcpConfig config;
  ContactSchedule schedule;
  std::array<PhaseSpline, 3> base_pos, base_euler, thruster;
  std::vector<std::array<PhaseSpline, 3>> ee, force;  // per arm
  bool has_thrusters = false;
  SolveStats stats;
  std::vector<std::pair<std::string, double>> slice_report;  // worst residual per slice

  int arm_count() const { return static_cast<int>(ee.size()); }
  double duration() const { return config.duration; }

  Eigen::Vector3d base_position(double t) const;
  Eigen::Vector3d base_velocity(double t) const;
  Eigen::Vector3d base_rpy(double t) const;
  Eigen::Vector3d base_rpy_rate(double t) const;
  Eigen::Vector3d omega_body(double t) const;
  Eigen::Vector3d thruster_body(double t) const;  // zero when thrusters are disabled
  Eigen::Vector3d ee_position(int arm, double t) const;
  Eigen::Vector3d ee_velocity(int arm, double t) const;
  Eigen::Vector3d contact_force(int arm, double t) const;
};

/// Rebuilds splines and the schedule from a (scaled) decision vector.
OcpSolution decode_solution(const OcpProblem& p, const Eigen::VectorXd& x);

struct OcpOutcome {
  OcpSolution solution;
  SolveResult raw;
};

/// Transcribes, solves from the built-in seed and decodes.
OcpOutcome solve_ocp(const OcpProblem& p, const SolverOptions& opt);

/// Worst residual per constraint slice: max |r| for equalities, max violation
/// for inequalities.
std::vector<std::pair<std::string, double>> slice_residual_report(const Transcription& tr,
                                                                  const SolveResult& r);

/// Largest end-effector travel across any single swing phase.
double max_single_swing_displacement(const OcpSolution& s);

/// Peak contact force magnitude over all arms, sampled at rate_hz.
double peak_contact_force(const OcpSolution& s, double rate_hz = 100.0);

/// Forward-integrates the base (RK4, substeps bounded by dt) under the
/// solution's force and thruster channels and returns the largest base
/// position error against the solution splines at rate_hz samples.
double dynamics_closure_error(const OcpSolution& s, const RobotModel& model, double rate_hz = 100.0,
                              double dt = 0.005);

}  // namespace armada
