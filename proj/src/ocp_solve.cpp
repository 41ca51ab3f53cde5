#include "armada/ocp_solution.hpp"

#include <algorithm>
#include <cmath>

#include "armada/euler.hpp"
#include "armada/rigid_body.hpp"

namespace armada {

namespace {

Eigen::Vector3d sample3(const std::array<PhaseSpline, 3>& ch, double t, int order) {
  Eigen::Vector3d v;
  for (int k = 0; k < 3; ++k) v[k] = order == 0 ? ch[k].value(t) : ch[k].rate(t);
  return v;
}

}  // namespace

Eigen::Vector3d OcpSolution::base_position(double t) const { return sample3(base_pos, t, 0); }
Eigen::Vector3d OcpSolution::base_velocity(double t) const { return sample3(base_pos, t, 1); }
Eigen::Vector3d OcpSolution::base_rpy(double t) const { return sample3(base_euler, t, 0); }
Eigen::Vector3d OcpSolution::base_rpy_rate(double t) const { return sample3(base_euler, t, 1); }

Eigen::Vector3d OcpSolution::omega_body(double t) const {
  const Eigen::Vector3d e = base_rpy(t), ed = base_rpy_rate(t);
  const Vec3T<double> w = body_rates_zyx<double>({e.x(), e.y(), e.z()}, {ed.x(), ed.y(), ed.z()});
  return {w[0], w[1], w[2]};
}

Eigen::Vector3d OcpSolution::thruster_body(double t) const {
  if (!has_thrusters) return Eigen::Vector3d::Zero();
  return sample3(thruster, t, 0);
}

Eigen::Vector3d OcpSolution::ee_position(int arm, double t) const { return sample3(ee[arm], t, 0); }
Eigen::Vector3d OcpSolution::ee_velocity(int arm, double t) const { return sample3(ee[arm], t, 1); }
Eigen::Vector3d OcpSolution::contact_force(int arm, double t) const {
  return sample3(force[arm], t, 0);
}

OcpSolution decode_solution(const OcpProblem& p, const Eigen::VectorXd& x) {
  OcpSolution s;
  s.config = p.config;
  s.schedule = schedule_from_decision(p, x);
  s.has_thrusters = p.config.thrusters;

  auto resolve = [&](const Ref& r) -> double {
    return r.free() ? x[r.idx] * p.x_scale[r.idx] : r.fixed;
  };
  auto make_spline = [&](const Channel& ch) {
    const GridDef& g = p.grids[ch.grid];
    const Eigen::VectorXd dur = softmax_durations(x.segment(g.theta0, g.count), g.total);
    std::vector<HermiteSegment> segs;
    segs.reserve(ch.pieces.size());
    for (const Piece& pc : ch.pieces)
      segs.push_back({dur[pc.phase] / pc.nsub, resolve(pc.u0), resolve(pc.du0), resolve(pc.u1),
                      resolve(pc.du1)});
    return PhaseSpline(segs);
  };

  for (int k = 0; k < 3; ++k) {
    s.base_pos[k] = make_spline(p.base_pos[k]);
    s.base_euler[k] = make_spline(p.base_euler[k]);
    if (p.config.thrusters) s.thruster[k] = make_spline(p.thruster_ch[k]);
  }
  s.ee.resize(p.arm_count());
  s.force.resize(p.arm_count());
  for (int a = 0; a < p.arm_count(); ++a)
    for (int k = 0; k < 3; ++k) {
      s.ee[a][k] = make_spline(p.ee[a][k]);
      s.force[a][k] = make_spline(p.force[a][k]);
    }
  return s;
}

std::vector<std::pair<std::string, double>> slice_residual_report(const Transcription& tr,
                                                                  const SolveResult& r) {
  std::vector<std::pair<std::string, double>> out;
  for (const SliceInfo& s : tr.slices()) {
    if (s.kind == SliceKind::Cost) continue;
    double worst = 0.0;
    for (int i = s.begin; i < s.end; ++i) {
      const double v = s.kind == SliceKind::Equality ? std::abs(r.eq[i]) : std::max(0.0, -r.ineq[i]);
      worst = std::max(worst, v);
    }
    out.emplace_back(s.name, worst);
  }
  return out;
}

OcpOutcome solve_ocp(const OcpProblem& p, const SolverOptions& opt) {
  Transcription tr(p);

  // Stage 1: hold the time partition at the seed. Without the duration
  // variables the transcription is only mildly nonlinear, so the iterate
  // reaches the feasible manifold quickly and cheaply.
  SolveControls hold;
  for (const GridDef& g : p.grids)
    for (int j = 0; j < g.count; ++j) hold.pinned.push_back(g.theta0 + j);
  SolverOptions warm_opt = opt;
  warm_opt.stat_tol = std::max(opt.stat_tol, 1e-2);
  warm_opt.max_outer = std::min(opt.max_outer, 20);
  if (opt.wall_limit > 0.0) warm_opt.wall_limit = 0.4 * opt.wall_limit;
  const SolveResult warm = solve_nlp(tr, p.x_seed, warm_opt, &hold);

  // Stage 2: release the durations from the warm start, carrying the
  // multipliers so the penalty does not have to rediscover them.
  SolveControls release;
  release.lambda0 = &warm.lambda;
  release.nu0 = &warm.nu;
  release.rho0 = std::clamp(warm.stats.penalty, opt.penalty0, 1e5);
  SolverOptions main_opt = opt;
  if (opt.wall_limit > 0.0)
    main_opt.wall_limit = std::max(1.0, opt.wall_limit - warm.stats.wall_seconds);
  SolveResult raw = solve_nlp(tr, warm.x, main_opt, &release);
  raw.stats.inner_iterations += warm.stats.inner_iterations;
  raw.stats.function_evals += warm.stats.function_evals;
  raw.stats.jacobian_evals += warm.stats.jacobian_evals;
  raw.stats.pattern_rebuilds += warm.stats.pattern_rebuilds;
  raw.stats.wall_seconds += warm.stats.wall_seconds;

  OcpOutcome out{decode_solution(p, raw.x), std::move(raw)};
  out.solution.stats = out.raw.stats;
  out.solution.slice_report = slice_residual_report(tr, out.raw);
  return out;
}

double max_single_swing_displacement(const OcpSolution& s) {
  double best = 0.0;
  for (int a = 0; a < s.arm_count(); ++a) {
    const ArmTimeline& tl = s.schedule.timeline(a);
    const std::vector<double> bounds = s.schedule.boundaries(a);
    for (int ph = 0; ph < static_cast<int>(tl.durations.size()); ++ph) {
      if (tl.kind(ph) != PhaseKind::Swing) continue;
      const Eigen::Vector3d d =
          s.ee_position(a, bounds[ph + 1]) - s.ee_position(a, bounds[ph]);
      best = std::max(best, d.norm());
    }
  }
  return best;
}

double peak_contact_force(const OcpSolution& s, double rate_hz) {
  double best = 0.0;
  for (double t : s.base_pos[0].sample_times(rate_hz))
    for (int a = 0; a < s.arm_count(); ++a)
      best = std::max(best, s.contact_force(a, t).norm());
  return best;
}

double dynamics_closure_error(const OcpSolution& s, const RobotModel& model, double rate_hz,
                              double dt) {
  const double T = s.duration();
  BodyState st;
  st.position = s.base_position(0.0);
  st.attitude = Quaternion::from_euler_zyx(s.base_rpy(0.0));
  st.velocity = s.base_velocity(0.0);
  st.omega = s.omega_body(0.0);

  BaseForceSystem sys;
  sys.contacts = [&](double t, std::vector<Eigen::Vector3d>& fs, std::vector<Eigen::Vector3d>& ps) {
    const double tc = std::clamp(t, 0.0, T);
    for (int a = 0; a < s.arm_count(); ++a) {
      fs.push_back(s.contact_force(a, tc));
      ps.push_back(s.ee_position(a, tc));
    }
  };
  sys.thrust = [&](double t) { return s.thruster_body(std::clamp(t, 0.0, T)); };

  double worst = 0.0;
  const std::vector<double> times = s.base_pos[0].sample_times(rate_hz);
  for (size_t k = 0; k < times.size(); ++k) {
    worst = std::max(worst, (st.position - s.base_position(times[k])).norm());
    if (k + 1 == times.size()) break;
    const double span = times[k + 1] - times[k];
    const int substeps = std::max(1, static_cast<int>(std::ceil(span / dt - 1e-9)));
    st = integrate_base_trajectory(st, times[k], span / substeps, substeps, sys, model);
  }
  return worst;
}

}  // namespace armada
