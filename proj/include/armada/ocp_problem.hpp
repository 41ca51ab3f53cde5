#pragma once

#include <Eigen/Core>
#include <array>
#include <string>
#include <vector>

#include "armada/contact_schedule.hpp"
#include "armada/heightmap.hpp"
#include "armada/robot_model.hpp"

namespace armada {

struct PoseSpec {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d rpy = Eigen::Vector3d::Zero();  // ZYX Euler [rad]
};

struct OcpConfig {
  PoseSpec start, goal;
  double duration = 20.0;       // [s]
  int contact_phases = 4;       // contact phases per arm (N)
  int thruster_segments = 4;    // base/thruster segmentation
  int polys = 3;                // cubics per segment and per swing/stance phase
  int defect_nodes = 5;         // collocation nodes per base piece, odd
  int path_nodes = 3;           // constraint nodes per arm piece, odd
  Eigen::Vector3d sigma_force{1.0, 1.0, 1.0};
  Eigen::Vector3d sigma_velocity{10.0, 10.0, 10.0};
  double sigma_angular = 0.0;   // optional angular-rate weight
  double clearance = 0.05;      // [m] swing margin above the map
  double swing_lift = 0.15;     // [m] seeded apex height of a swing
  double duration_floor = 1e-3; // [s]
  bool thrusters = true;
  bool start_in_contact = true; // false: free-floating approach first
  bool pin_boundary_velocity = true;
  bool serialize_swings = true; // keep swing windows pairwise disjoint
  double approach_duration = 4.0;  // [s] seed length of the leading swing
};

/// Reference into the decision vector, or a fixed (structurally pinned) value.
struct Ref {
  int idx = -1;
  double fixed = 0.0;
  bool free() const { return idx >= 0; }
  static Ref pinned(double v) { return {-1, v}; }
};

/// One cubic (or constant hold) of a channel: phase-local subdivision `sub`
/// of `nsub` equal-duration pieces.
struct Piece {
  int phase = 0, nsub = 1, sub = 0;
  Ref u0, du0, u1, du1;
};

/// Scalar trajectory channel attached to a duration grid.
struct Channel {
  int grid = 0;  // 0 = base grid, 1 + arm for arm grids
  std::vector<Piece> pieces;
  std::vector<int> phase_first;  // piece index of each phase's first piece
  std::vector<int> phase_nsub;   // pieces per phase

  const Piece& piece(int phase, int sub) const { return pieces[phase_first[phase] + sub]; }
};

struct GridDef {
  int theta0 = 0;  // first duration variable
  int count = 0;   // phase / segment count
  double total = 0.0;
};

/// Duration logits are squashed to [-kLogitBound, kLogitBound] before the
/// softmax. The bound keeps every duration a representable fraction of the
/// horizon, so iterates can never underflow a segment length (whose Hermite
/// coefficient derivatives grow like 1/h^4), while still allowing duration
/// ratios up to e^(2 kLogitBound).
inline constexpr double kLogitBound = 5.0;

/// total * softmax(clamped theta); every entry is strictly positive.
Eigen::VectorXd softmax_durations(const Eigen::VectorXd& theta, double total);

struct GridNode {
  int phase = 0, sub = 0;
  double frac = 0.0;  // position inside the sub-piece, in [0, 1]
};

struct LayoutBlock {
  std::string name;
  int begin = 0, end = 0;
};

struct SwingOrderPair {
  int arm_before = 0, phase_before = 0;
  int arm_after = 0, phase_after = 0;
};

/// Fully transcribed problem structure: decision layout, channels, node
/// tables, seed and scaling. Built once per solve; immutable afterwards.
struct OcpProblem {
  RobotModel model;
  HeightMap map;
  OcpConfig config;

  std::vector<GridDef> grids;  // [0] = base, [1 + i] = arm i
  ContactSchedule seed_schedule;

  std::array<Channel, 3> base_pos, base_euler, thruster_ch;
  std::vector<std::array<Channel, 3>> ee, force;  // per arm

  std::vector<GridNode> defect_nodes;                 // base grid
  std::vector<std::vector<GridNode>> path_nodes;      // per arm
  std::vector<std::vector<char>> clearance_node;      // per arm, aligned to path_nodes
  std::vector<SwingOrderPair> swing_order;

  int nx = 0;
  Eigen::VectorXd x_seed;   // scaled coordinates
  Eigen::VectorXd x_scale;  // physical value = x * scale
  std::vector<LayoutBlock> layout;

  int arm_count() const { return static_cast<int>(ee.size()); }
  bool phase_is_contact(int arm, int phase) const {
    return seed_schedule.timeline(arm).kind(phase) == PhaseKind::Contact;
  }
};

/// Builds layout, seed and node tables. Throws std::invalid_argument on
/// inconsistent configuration (non-positive horizon, even node counts,
/// near-gimbal-lock boundary attitudes, goal off a finite map, ...).
OcpProblem build_problem(const RobotModel& model, const HeightMap& map, const OcpConfig& config);

/// Schedule implied by a (scaled) decision vector's duration variables.
ContactSchedule schedule_from_decision(const OcpProblem& p, const Eigen::VectorXd& x);

}  // namespace armada
