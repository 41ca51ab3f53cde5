#include "armada/ocp_problem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "armada/euler.hpp"

namespace armada {

namespace {

double smooth_h(double s) { return s * s * (3.0 - 2.0 * s); }
double smooth_hd(double s) { return 6.0 * s * (1.0 - s); }
double smooth_hdd(double s) { return 6.0 - 12.0 * s; }

// Boundary-to-boundary seed motion: smoothstep in position and Euler angles.
// Zero velocity and acceleration at both ends.
struct SeedPath {
  Eigen::Vector3d p0, dp, e0, de;
  double T = 1.0;

  double s(double t) const { return std::clamp(t / T, 0.0, 1.0); }
  Eigen::Vector3d pos(double t) const { return p0 + smooth_h(s(t)) * dp; }
  Eigen::Vector3d vel(double t) const { return smooth_hd(s(t)) / T * dp; }
  Eigen::Vector3d acc(double t) const { return smooth_hdd(s(t)) / (T * T) * dp; }
  Eigen::Vector3d rpy(double t) const { return e0 + smooth_h(s(t)) * de; }
  Eigen::Vector3d rpy_rate(double t) const { return smooth_hd(s(t)) / T * de; }
  Eigen::Matrix3d rotation(double t) const {
    const Eigen::Vector3d e = rpy(t);
    const Mat3T<double> m = rotation_zyx(e.x(), e.y(), e.z());
    Eigen::Matrix3d R;
    R << m[0], m[1], m[2], m[3], m[4], m[5], m[6], m[7], m[8];
    return R;
  }
};

struct SwingWindow {
  int arm = 0, phase = 0;
  double start = 0.0, duration = 0.0;
};

// Interleaved stepping order; for four arms this is {0, 3, 1, 2}, the
// diagonal pattern (front-left, hind-right, front-right, hind-left).
std::vector<int> stepping_order(int zeta) {
  std::vector<int> order;
  int lo = 0, hi = zeta - 1;
  while (lo <= hi) {
    order.push_back(lo++);
    if (lo <= hi) order.push_back(hi--);
  }
  return order;
}

// Seed phase timelines. Docked start: N contact phases interleaved with
// N - 1 swings, starting and ending in contact, so the robot is attached at
// both trajectory ends. Free-floating start: one leading swing shared by all
// arms, then the same serialized pattern, ending in contact.
std::vector<ArmTimeline> make_timelines(const OcpConfig& c, int zeta,
                                        std::vector<SwingWindow>& windows) {
  const double T = c.duration;
  const int N = c.contact_phases;
  const std::vector<int> order = stepping_order(zeta);

  std::vector<std::vector<SwingWindow>> per_arm(zeta);
  const double region0 = c.start_in_contact ? 0.0 : c.approach_duration + 0.05 * (T - c.approach_duration);
  if (N > 1) {
    const int cycles = N - 1;
    const double cycle = (T - region0) / cycles;
    const double slot = cycle / (zeta + 1);
    const double dur = 0.8 * slot;
    for (int j = 0; j < cycles; ++j) {
      for (int rank = 0; rank < zeta; ++rank) {
        const int arm = order[rank];
        const int phase = c.start_in_contact ? 2 * j + 1 : 2 * j + 2;
        per_arm[arm].push_back({arm, phase, region0 + j * cycle + (rank + 0.5) * slot, dur});
      }
    }
  }

  std::vector<ArmTimeline> timelines(zeta);
  for (int a = 0; a < zeta; ++a) {
    ArmTimeline& tl = timelines[a];
    tl.first = c.start_in_contact ? PhaseKind::Contact : PhaseKind::Swing;
    double t = 0.0;
    if (!c.start_in_contact) {
      tl.durations.push_back(c.approach_duration);
      t = c.approach_duration;
    }
    for (const SwingWindow& w : per_arm[a]) {
      tl.durations.push_back(w.start - t);       // contact up to liftoff
      tl.durations.push_back(w.duration);        // swing
      t = w.start + w.duration;
    }
    tl.durations.push_back(T - t);                // final contact
    for (double d : tl.durations)
      if (d <= c.duration_floor)
        throw std::invalid_argument("ocp: seed schedule hits the duration floor; horizon too short for the phase count");
    windows.insert(windows.end(), per_arm[a].begin(), per_arm[a].end());
  }
  std::sort(windows.begin(), windows.end(),
            [](const SwingWindow& x, const SwingWindow& y) { return x.start < y.start; });
  return timelines;
}

struct Alloc {
  std::vector<double> seed, scale;
  std::vector<LayoutBlock> blocks;
  std::string name;
  int begin = 0;

  void open(std::string n) {
    name = std::move(n);
    begin = static_cast<int>(seed.size());
  }
  void close() { blocks.push_back({name, begin, static_cast<int>(seed.size())}); }
  Ref add(double sd, double sc) {
    seed.push_back(sd);
    scale.push_back(sc);
    return Ref{static_cast<int>(seed.size()) - 1, 0.0};
  }
};

void validate(const RobotModel& model, const OcpConfig& c) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("ocp: " + msg); };
  if (model.arm_count() < 1) fail("model has no arms");
  if (!(c.duration > 0.0)) fail("horizon must be positive");
  if (c.contact_phases < 1) fail("need at least one contact phase");
  if (c.thruster_segments < 1) fail("need at least one base segment");
  if (c.polys < 2 || c.polys > 8) fail("polynomials per segment must be in [2, 8]");
  if (c.defect_nodes < 3 || c.defect_nodes % 2 == 0) fail("defect nodes must be odd and >= 3");
  if (c.path_nodes < 3 || c.path_nodes % 2 == 0) fail("path nodes must be odd and >= 3");
  const double pitch_cap = 80.0 * M_PI / 180.0;
  if (std::abs(c.start.rpy.y()) > pitch_cap || std::abs(c.goal.rpy.y()) > pitch_cap)
    fail("boundary pitch too close to gimbal lock");
  if ((c.sigma_force.array() < 0.0).any() || (c.sigma_velocity.array() < 0.0).any() || c.sigma_angular < 0.0)
    fail("cost weights must be non-negative");
  if (c.clearance < 0.0) fail("clearance margin must be non-negative");
  if (!(c.duration_floor > 0.0)) fail("duration floor must be positive");
  if (!c.start_in_contact && !(c.approach_duration > 0.0 && c.approach_duration < 0.8 * c.duration))
    fail("approach duration must lie well inside the horizon");
}

}  // namespace

Eigen::VectorXd softmax_durations(const Eigen::VectorXd& theta, double total) {
  const Eigen::ArrayXd b = kLogitBound * (theta.array() / kLogitBound).tanh();
  Eigen::ArrayXd e = (b - b.maxCoeff()).exp();
  return total / e.sum() * e.matrix();
}

OcpProblem build_problem(const RobotModel& model, const HeightMap& map, const OcpConfig& config) {
  validate(model, config);
  OcpProblem p;
  p.model = model;
  p.map = map;
  p.config = config;

  const int zeta = model.arm_count();
  const int P = config.polys;
  const double T = config.duration;

  SeedPath path{config.start.position, config.goal.position - config.start.position,
                config.start.rpy, config.goal.rpy - config.start.rpy, T};

  // Boundary footholds must sit on the map.
  for (int a = 0; a < zeta; ++a) {
    for (bool at_goal : {false, true}) {
      const Eigen::Vector3d f =
          (at_goal ? config.goal.position : config.start.position) +
          path.rotation(at_goal ? T : 0.0) * model.nominal_tool[a];
      try {
        (void)map.height_at(f.x(), f.y());
      } catch (const std::out_of_range&) {
        throw std::invalid_argument("ocp: boundary foothold outside the height map");
      }
    }
  }

  std::vector<SwingWindow> windows;
  std::vector<ArmTimeline> timelines = make_timelines(config, zeta, windows);
  p.seed_schedule = ContactSchedule(timelines, T);

  Alloc al;

  // Phase and segment durations, softmax-reparametrized: one raw variable per
  // phase, durations = T * softmax(theta). The partition of [0, T] is then
  // structural rather than a constraint.
  p.grids.resize(1 + zeta);
  al.open("durations/base");
  p.grids[0].theta0 = static_cast<int>(al.seed.size());
  p.grids[0].count = config.thruster_segments;
  p.grids[0].total = T;
  for (int j = 0; j < config.thruster_segments; ++j)
    al.add(std::log(T / config.thruster_segments), 1.0);
  al.close();
  for (int a = 0; a < zeta; ++a) {
    al.open("durations/arm" + std::to_string(a));
    GridDef& g = p.grids[1 + a];
    g.theta0 = static_cast<int>(al.seed.size());
    g.count = static_cast<int>(timelines[a].durations.size());
    g.total = T;
    for (double d : timelines[a].durations) al.add(std::log(d), 1.0);
    al.close();
  }

  // Base position, attitude and thruster channels share the base grid:
  // thruster_segments phases, P cubics each, C1 knots. Boundary knots of the
  // pose channels are pinned to the requested poses.
  const int nbase = config.thruster_segments * P;
  auto build_base_channel = [&](const char* tag, int axis, int kind) {
    // kind: 0 position, 1 euler, 2 thruster
    al.open(std::string(tag) + "/" + "xyz"[axis]);
    Channel ch;
    ch.grid = 0;
    std::vector<Ref> val(nbase + 1), der(nbase + 1);
    for (int j = 0; j <= nbase; ++j) {
      const double t = T * j / nbase;
      double v = 0.0, dv = 0.0, sc = 1.0;
      if (kind == 0) {
        v = path.pos(t)[axis];
        dv = path.vel(t)[axis];
      } else if (kind == 1) {
        v = path.rpy(t)[axis];
        dv = path.rpy_rate(t)[axis];
      } else {
        sc = 10.0;
        if (p.seed_schedule.count_in_contact(t) == 0)
          v = (path.rotation(t).transpose() * (model.total_mass * path.acc(t)))[axis];
      }
      const bool boundary = (j == 0 || j == nbase) && kind != 2;
      if (boundary) {
        val[j] = Ref::pinned(v);
        der[j] = config.pin_boundary_velocity ? Ref::pinned(dv) : al.add(dv, sc);
      } else {
        val[j] = al.add(v, sc);
        der[j] = al.add(dv, sc);
      }
    }
    for (int j = 0; j < nbase; ++j)
      ch.pieces.push_back({j / P, P, j % P, val[j], der[j], val[j + 1], der[j + 1]});
    for (int ph = 0; ph < config.thruster_segments; ++ph) {
      ch.phase_first.push_back(ph * P);
      ch.phase_nsub.push_back(P);
    }
    al.close();
    return ch;
  };
  for (int k = 0; k < 3; ++k) p.base_pos[k] = build_base_channel("base_pos", k, 0);
  for (int k = 0; k < 3; ++k) p.base_euler[k] = build_base_channel("base_euler", k, 1);
  if (config.thrusters)
    for (int k = 0; k < 3; ++k) p.thruster_ch[k] = build_base_channel("thruster", k, 2);

  // End-effector and interface-force channels per arm. In contact the
  // end effector holds a constant foothold (a single shared knot) and the
  // force is P cubics pinned to zero at liftoff/touchdown junctions; in swing
  // the end effector is P cubics whose boundary knots share the adjacent
  // foothold constants at zero rate, and the force is identically zero.
  p.ee.resize(zeta);
  p.force.resize(zeta);
  for (int a = 0; a < zeta; ++a) {
    const ArmTimeline& tl = timelines[a];
    const int nphase = static_cast<int>(tl.durations.size());

    // Phase boundaries and per-contact-phase seed footholds.
    std::vector<double> start(nphase + 1, 0.0);
    for (int ph = 0; ph < nphase; ++ph) start[ph + 1] = start[ph] + tl.durations[ph];
    std::vector<Eigen::Vector3d> foothold(nphase, Eigen::Vector3d::Zero());
    for (int ph = 0; ph < nphase; ++ph) {
      if (tl.kind(ph) != PhaseKind::Contact) continue;
      const double tref = (config.start_in_contact && ph == 0) ? 0.0 : 0.5 * (start[ph] + start[ph + 1]);
      Eigen::Vector3d f = path.pos(tref) + path.rotation(tref) * model.nominal_tool[a];
      f.z() = map.height_at(f.x(), f.y());
      foothold[ph] = f;
    }
    const Eigen::Vector3d ee0 =
        config.start.position + path.rotation(0.0) * model.nominal_tool[a];

    for (int k = 0; k < 3; ++k) {
      // Foothold constants; the initial one is pinned when docked at start.
      al.open("ee/arm" + std::to_string(a) + "/" + "xyz"[k]);
      std::vector<Ref> cref(nphase);
      for (int ph = 0; ph < nphase; ++ph) {
        if (tl.kind(ph) != PhaseKind::Contact) continue;
        cref[ph] = (config.start_in_contact && ph == 0) ? Ref::pinned(foothold[ph][k])
                                                        : al.add(foothold[ph][k], 1.0);
      }

      Channel ee;
      ee.grid = 1 + a;
      for (int ph = 0; ph < nphase; ++ph) {
        ee.phase_first.push_back(static_cast<int>(ee.pieces.size()));
        if (tl.kind(ph) == PhaseKind::Contact) {
          ee.phase_nsub.push_back(1);
          ee.pieces.push_back({ph, 1, 0, cref[ph], Ref::pinned(0.0), cref[ph], Ref::pinned(0.0)});
          continue;
        }
        ee.phase_nsub.push_back(P);
        const bool has_prev = ph > 0;
        const bool has_next = ph + 1 < nphase;
        const double a0 = has_prev ? foothold[ph - 1][k] : ee0[k];
        const double a1 = has_next ? foothold[ph + 1][k] : a0;
        std::vector<Ref> val(P + 1), der(P + 1);
        val[0] = has_prev ? cref[ph - 1] : Ref::pinned(ee0[k]);
        der[0] = Ref::pinned(0.0);
        val[P] = has_next ? cref[ph + 1] : al.add(a1, 1.0);
        der[P] = Ref::pinned(0.0);
        const double dur = tl.durations[ph];
        for (int j = 1; j < P; ++j) {
          const double sj = static_cast<double>(j) / P;
          double v = a0 + smooth_h(sj) * (a1 - a0);
          double dv = smooth_hd(sj) * (a1 - a0) / dur;
          if (k == 2 && has_prev) {  // approach swings descend without a lift bump
            v += config.swing_lift * std::pow(std::sin(M_PI * sj), 2);
            dv += config.swing_lift * M_PI * std::sin(2.0 * M_PI * sj) / dur;
          }
          val[j] = al.add(v, 1.0);
          der[j] = al.add(dv, 1.0);
        }
        for (int j = 0; j < P; ++j)
          ee.pieces.push_back({ph, P, j, val[j], der[j], val[j + 1], der[j + 1]});
      }
      p.ee[a][k] = std::move(ee);
      al.close();

      al.open("force/arm" + std::to_string(a) + "/" + "xyz"[k]);
      Channel fc;
      fc.grid = 1 + a;
      for (int ph = 0; ph < nphase; ++ph) {
        fc.phase_first.push_back(static_cast<int>(fc.pieces.size()));
        if (tl.kind(ph) == PhaseKind::Swing) {
          fc.phase_nsub.push_back(1);
          fc.pieces.push_back({ph, 1, 0, Ref::pinned(0.0), Ref::pinned(0.0), Ref::pinned(0.0), Ref::pinned(0.0)});
          continue;
        }
        fc.phase_nsub.push_back(P);
        std::vector<Ref> val(P + 1), der(P + 1);
        for (int j = 0; j <= P; ++j) {
          const bool junction = (j == 0 && ph > 0) || (j == P && ph + 1 < nphase);
          if (junction) {
            val[j] = Ref::pinned(0.0);
            der[j] = Ref::pinned(0.0);
            continue;
          }
          const double t = start[ph] + tl.durations[ph] * j / P;
          const int n = p.seed_schedule.count_in_contact(std::min(t, T));
          const double v = n > 0 ? model.total_mass * path.acc(t)[k] / n : 0.0;
          val[j] = al.add(v, 10.0);
          der[j] = al.add(0.0, 10.0);
        }
        for (int j = 0; j < P; ++j)
          fc.pieces.push_back({ph, P, j, val[j], der[j], val[j + 1], der[j + 1]});
      }
      p.force[a][k] = std::move(fc);
      al.close();
    }
  }

  // Collocation nodes: every sub-piece of the base grid carries defect_nodes
  // equally spaced nodes including both endpoints, so accelerations at knots
  // are matched from both sides.
  for (int ph = 0; ph < config.thruster_segments; ++ph)
    for (int sub = 0; sub < P; ++sub)
      for (int j = 0; j < config.defect_nodes; ++j)
        p.defect_nodes.push_back({ph, sub, static_cast<double>(j) / (config.defect_nodes - 1)});

  // Arm path nodes: endpoints deduplicated across adjacent pieces.
  p.path_nodes.resize(zeta);
  p.clearance_node.resize(zeta);
  for (int a = 0; a < zeta; ++a) {
    const ArmTimeline& tl = timelines[a];
    for (int ph = 0; ph < static_cast<int>(tl.durations.size()); ++ph) {
      const int nsub = p.ee[a][0].phase_nsub[ph];
      for (int sub = 0; sub < nsub; ++sub) {
        for (int j = 0; j < config.path_nodes; ++j) {
          const double frac = static_cast<double>(j) / (config.path_nodes - 1);
          if (j == 0 && !(ph == 0 && sub == 0)) continue;
          const double sphase = (sub + frac) / nsub;
          p.path_nodes[a].push_back({ph, sub, frac});
          p.clearance_node[a].push_back(tl.kind(ph) == PhaseKind::Swing && sphase > 0.2 &&
                                        sphase < 0.8);
        }
      }
    }
  }

  // Swing serialization pairs, in seed start order; the shared leading swing
  // of a free-floating start (phase 0) is exempt.
  if (config.serialize_swings) {
    for (size_t w = 0; w + 1 < windows.size(); ++w)
      p.swing_order.push_back({windows[w].arm, windows[w].phase, windows[w + 1].arm, windows[w + 1].phase});
  }

  p.nx = static_cast<int>(al.seed.size());
  p.x_seed.resize(p.nx);
  p.x_scale.resize(p.nx);
  for (int i = 0; i < p.nx; ++i) {
    p.x_scale[i] = al.scale[i];
    p.x_seed[i] = al.seed[i] / al.scale[i];
  }
  p.layout = std::move(al.blocks);
  return p;
}

ContactSchedule schedule_from_decision(const OcpProblem& p, const Eigen::VectorXd& x) {
  std::vector<ArmTimeline> timelines(p.arm_count());
  for (int a = 0; a < p.arm_count(); ++a) {
    const GridDef& g = p.grids[1 + a];
    const Eigen::VectorXd dur = softmax_durations(x.segment(g.theta0, g.count), g.total);
    timelines[a].first = p.seed_schedule.timeline(a).first;
    timelines[a].durations.assign(dur.data(), dur.data() + dur.size());
  }
  return ContactSchedule(timelines, p.config.duration);
}

}  // namespace armada
