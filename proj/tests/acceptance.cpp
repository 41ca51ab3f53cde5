// Acceptance suite: nine checks, one PASS/FAIL line each, tolerances pinned
// as the constants below. Exits non-zero when any check fails.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "armada/controllers.hpp"
#include "armada/env_properties.hpp"
#include "armada/phase_spline.hpp"
#include "armada/quaternion.hpp"
#include "armada/scenario.hpp"
#include "armada/transcription.hpp"

using namespace armada;

namespace {

// Pinned acceptance tolerances.
constexpr double kEqResidualBound = 1e-4;     // max equality residual, case 1.1
constexpr double kFinalXErrorBound = 1e-3;    // [m] base x error at T
constexpr double kPlanWallBound = 60.0;       // [s] case 1.1 solve time
constexpr double kThrusterPeakRatio = 0.8;    // with/without peak force ratio
constexpr double kClosureBound = 1e-2;        // [m] forward-integration closure
constexpr double kDescentSlack = 1e-4;        // [m] allowed rise between samples
constexpr double kTouchdownTol = 1e-3;        // [m] height at first contact
constexpr double kTrackMeanBound = 0.15;      // [m] diff-IK mean base error
constexpr double kGradientTol = 1e-4;         // relative, vs central differences
constexpr double kSplineTol = 1e-10;          // endpoint / C1 suite
constexpr double kSo3Tol = 1e-9;              // rotation / quaternion suite
constexpr double kMomentumTol = 1e-6;         // free-floating conservation
constexpr double kHygieneWallBound = 300.0;   // [s] invariant suites runtime

int failures = 0;

void report(int index, const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s  criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", index, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

std::vector<double> per_arm_peak_force(const OcpSolution& s) {
  std::vector<double> peak(s.arm_count(), 0.0);
  for (int a = 0; a < s.arm_count(); ++a)
    for (double t : s.base_pos[0].sample_times(100.0))
      peak[a] = std::max(peak[a], s.contact_force(a, t).norm());
  return peak;
}

}  // namespace

int main() {
  const auto t_start = std::chrono::steady_clock::now();

  const ScenarioConfig case1 = load_scenario("scenarios/case1_1.json");
  const ScenarioConfig case2 = load_scenario("scenarios/case2.json");
  const ScenarioConfig ablation = load_scenario("scenarios/ablation_5s.json");

  // ---- 1. Case 1.1 plan quality ------------------------------------------
  const OcpOutcome plan1 = solve_ocp(build_problem(case1.model, case1.map, case1.ocp),
                                     case1.solver);
  const OcpSolution& sol1 = plan1.solution;
  {
    const double x_goal = case1.ocp.goal.position.x();
    const double x_err = std::abs(sol1.base_position(sol1.duration()).x() - x_goal);
    const bool pass = sol1.stats.converged && sol1.stats.max_eq_violation < kEqResidualBound &&
                      x_err < kFinalXErrorBound && sol1.stats.wall_seconds < kPlanWallBound;
    report(1, "case 1.1 converges to the 1.2 m goal",
           pass,
           fmt("converged=%d, max|eq|=%.2e, final x err=%.2e m, wall=%.1f s",
               sol1.stats.converged ? 1 : 0, sol1.stats.max_eq_violation, x_err,
               sol1.stats.wall_seconds));
  }

  // ---- 2. Thrusters lower the peak contact force --------------------------
  {
    ScenarioConfig no_thrust = case1;
    no_thrust.ocp.thrusters = false;
    const OcpOutcome plan_nt =
        solve_ocp(build_problem(no_thrust.model, no_thrust.map, no_thrust.ocp), no_thrust.solver);
    const std::vector<double> with_u = per_arm_peak_force(sol1);
    const std::vector<double> without_u = per_arm_peak_force(plan_nt.solution);
    bool each_lower = plan_nt.solution.stats.converged;
    double peak_with = 0.0, peak_without = 0.0;
    for (std::size_t a = 0; a < with_u.size(); ++a) {
      each_lower = each_lower && with_u[a] < without_u[a];
      peak_with = std::max(peak_with, with_u[a]);
      peak_without = std::max(peak_without, without_u[a]);
    }
    const double ratio = peak_with / peak_without;
    report(2, "thrusters reduce peak contact force", each_lower && ratio < kThrusterPeakRatio,
           fmt("per-arm lower=%d, peak %.2f N vs %.2f N, ratio=%.3f", each_lower ? 1 : 0,
               peak_with, peak_without, ratio));
  }

  // ---- 3. Gait keeps three or four arms docked ----------------------------
  {
    double initial_end = sol1.duration();
    for (int a = 0; a < sol1.arm_count(); ++a)
      initial_end = std::min(initial_end, sol1.schedule.boundaries(a)[1]);
    bool ok = true;
    int bad_count = -1;
    double bad_t = 0.0;
    for (double t : sol1.base_pos[0].sample_times(100.0)) {
      if (t <= initial_end) continue;
      const int c = sol1.schedule.count_in_contact(t);
      if (c != 3 && c != 4) {
        ok = false;
        bad_count = c;
        bad_t = t;
        break;
      }
    }
    report(3, "three or four arms docked after the initial phase", ok,
           ok ? fmt("checked %.0f Hz samples over (%.2f, %.2f] s", 100.0, initial_end,
                    sol1.duration())
              : fmt("count=%d at t=%.2f s", bad_count, bad_t));
  }

  // ---- 4. Centroidal closure of the solved trajectory ---------------------
  {
    const double err = dynamics_closure_error(sol1, case1.model, 100.0, 0.005);
    report(4, "forward integration reproduces the planned base path", err < kClosureBound,
           fmt("max position error %.2e m at 100 Hz", err));
  }

  // ---- 5. Case 2 approach descends monotonically to touchdown -------------
  {
    const OcpOutcome plan2 = solve_ocp(build_problem(case2.model, case2.map, case2.ocp),
                                       case2.solver);
    const OcpSolution& sol2 = plan2.solution;
    bool ok = plan2.solution.stats.converged;
    std::string detail = ok ? "" : "solve did not converge";
    for (int a = 0; a < sol2.arm_count() && ok; ++a) {
      if (sol2.schedule.timeline(a).first != PhaseKind::Swing) {
        ok = false;
        detail = fmt("arm %d does not start in an approach swing", a);
        break;
      }
      const double touchdown = sol2.schedule.boundaries(a)[1];
      const Eigen::Vector3d p0 = sol2.ee_position(a, 0.0);
      const double surface0 = case2.map.height_at(p0.x(), p0.y());
      if (std::abs(p0.z() - surface0 - 0.5) > 0.05) {
        ok = false;
        detail = fmt("arm %d starts %.3f m above the surface", a, p0.z() - surface0);
        break;
      }
      double prev_z = p0.z();
      for (double t = 0.01; t <= touchdown; t += 0.01) {
        const double z = sol2.ee_position(a, t).z();
        if (z > prev_z + kDescentSlack) {
          ok = false;
          detail = fmt("arm %d rises %.2e m at t=%.2f s", a, z - prev_z, t);
          break;
        }
        prev_z = z;
      }
      if (!ok) break;
      const Eigen::Vector3d pc = sol2.ee_position(a, touchdown);
      const double gap = pc.z() - case2.map.height_at(pc.x(), pc.y());
      if (std::abs(gap) > kTouchdownTol) {
        ok = false;
        detail = fmt("arm %d touches down %.2e m off the surface", a, gap);
      }
    }
    if (ok) detail = "all arms descend 0.5 m monotonically to contact";
    report(5, "case 2 approach phase reaches the surface", ok, detail);
  }

  // ---- 6. Ablation family solves; fewer phases mean longer swings ---------
  {
    std::map<std::string, OcpOutcome> runs;
    bool all_converged = true;
    std::string detail;
    for (int polys : {2, 3, 4, 5}) {
      ScenarioConfig v = ablation;
      v.ocp.polys = polys;
      v.ocp.contact_phases = 4;
      runs["p" + std::to_string(polys)] =
          solve_ocp(build_problem(v.model, v.map, v.ocp), v.solver);
    }
    for (int contacts : {4, 6}) {
      ScenarioConfig v = ablation;
      v.ocp.polys = 3;
      v.ocp.contact_phases = contacts;
      runs["c" + std::to_string(contacts)] =
          solve_ocp(build_problem(v.model, v.map, v.ocp), v.solver);
    }
    for (const auto& [label, out] : runs) {
      if (!out.solution.stats.converged) {
        all_converged = false;
        detail += label + " did not converge; ";
      }
    }
    const double swing4 = max_single_swing_displacement(runs["c4"].solution);
    const double swing6 = max_single_swing_displacement(runs["c6"].solution);
    const bool ordering = swing4 > swing6;
    report(6, "2.5 m in 5 s solves across the ablation family",
           all_converged && ordering,
           fmt("%smax swing 4-phase %.3f m vs 6-phase %.3f m", detail.c_str(), swing4, swing6));
  }

  // ---- 7. Classical trackers: diff-IK within bound, impedance better ------
  {
    TrackerOptions diffik = case1.tracker;
    diffik.kind = ControllerKind::DiffIk;
    const TrackingReport rep_ik = track_solution(case1.model, sol1, diffik);
    TrackerOptions imp = case1.tracker;
    imp.kind = ControllerKind::Impedance;
    const TrackingReport rep_imp = track_solution(case1.model, sol1, imp);
    const bool pass = rep_ik.mean_base_error <= kTrackMeanBound &&
                      rep_imp.mean_base_error < rep_ik.mean_base_error;
    report(7, "diff-IK tracks within 0.15 m and impedance improves on it", pass,
           fmt("diff-IK mean %.3e m, impedance mean %.3e m", rep_ik.mean_base_error,
               rep_imp.mean_base_error));
  }

  // ---- 8. Environment invariant suite --------------------------------------
  {
    const EnvConfig cfg = load_env_config("env/default_env.json");
    const auto results = run_env_property_suite(case1.model, cfg, 0, 100000);
    bool ok = !results.empty();
    std::string detail = fmt("%zu properties", results.size());
    for (const auto& r : results) {
      if (!r.pass) {
        ok = false;
        detail += "; FAIL " + r.name + (r.detail.empty() ? "" : ": " + r.detail);
      }
    }
    report(8, "reward, noise, curriculum and episode invariants hold", ok, detail);
  }

  // ---- 9. Numerical hygiene, timed -----------------------------------------
  {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string detail;

    // Gradients of the cost and every constraint slice vs central differences.
    {
      OcpConfig small;
      small.start.position = {0.0, 0.0, 0.6253345237791563};
      small.goal.position = {0.45, 0.0, 0.6253345237791563};
      small.duration = 8.0;
      small.contact_phases = 2;
      small.thruster_segments = 2;
      small.polys = 2;
      const OcpProblem p = build_problem(case1.model, HeightMap::flat(0.0), small);
      Transcription tr(p);
      std::mt19937 rng(17);
      std::normal_distribution<double> noise(0.0, 0.02);
      Eigen::VectorXd x = p.x_seed;
      for (int i = 0; i < x.size(); ++i) x[i] += noise(rng);

      JacobianPattern pat = tr.pattern(x);
      SparseRows jac;
      Eigen::VectorXd eq, ineq, cost_terms;
      ok = ok && tr.jacobian(x, pat, jac, eq, ineq, cost_terms);
      Eigen::MatrixXd J = Eigen::MatrixXd::Zero(tr.num_rows(), tr.num_vars());
      for (int r = 0; r < tr.num_rows(); ++r)
        for (const auto& [c, v] : jac.rows[r]) J(r, c) = v;

      const double h = 1e-6;
      double worst = 0.0;
      std::string worst_slice;
      for (int probe = 0; probe < 8; ++probe) {
        Eigen::VectorXd w(x.size());
        for (int i = 0; i < w.size(); ++i) w[i] = noise(rng);
        w.normalize();
        Eigen::VectorXd eqp, ineqp, eqm, ineqm;
        double cp = 0.0, cm = 0.0;
        tr.eval(x + h * w, eqp, ineqp, cp);
        tr.eval(x - h * w, eqm, ineqm, cm);
        for (const SliceInfo& s : tr.slices()) {
          if (s.kind == SliceKind::Cost) continue;
          const int offset = s.kind == SliceKind::Equality ? 0 : tr.num_eq();
          const Eigen::VectorXd& fp = s.kind == SliceKind::Equality ? eqp : ineqp;
          const Eigen::VectorXd& fm = s.kind == SliceKind::Equality ? eqm : ineqm;
          for (int r = s.begin; r < s.end; ++r) {
            const double fd = (fp[r] - fm[r]) / (2.0 * h);
            const double an = J.row(offset + r).dot(w);
            const double e = std::abs(an - fd) / std::max(1.0, std::abs(fd));
            if (e > worst) {
              worst = e;
              worst_slice = s.name;
            }
          }
        }
        double dcost = 0.0;
        for (int r = 0; r < tr.num_cost_terms(); ++r)
          dcost += 2.0 * cost_terms[r] * J.row(tr.num_eq() + tr.num_ineq() + r).dot(w);
        const double fd_cost = (cp - cm) / (2.0 * h);
        const double e = std::abs(dcost - fd_cost) / std::max(1.0, std::abs(fd_cost));
        if (e > worst) {
          worst = e;
          worst_slice = "cost";
        }
      }
      ok = ok && worst < kGradientTol;
      detail += fmt("grad %.1e (%s)", worst, worst_slice.c_str());
    }

    // Spline endpoint and continuity suite.
    {
      std::mt19937 rng(23);
      std::uniform_real_distribution<double> d(-1.0, 1.0);
      double worst = 0.0;
      for (int trial = 0; trial < 50; ++trial) {
        std::vector<HermiteSegment> segs;
        double u = d(rng), du = d(rng);
        for (int k = 0; k < 5; ++k) {
          HermiteSegment s{0.3 + 0.5 * std::abs(d(rng)), u, du, d(rng), d(rng)};
          u = s.u1;
          du = s.du1;
          segs.push_back(s);
        }
        const PhaseSpline sp(segs);
        double t0 = 0.0;
        for (const auto& s : segs) {
          worst = std::max(worst, std::abs(sp.value(t0) - s.u0));
          worst = std::max(worst, std::abs(sp.rate(t0) - s.du0));
          t0 += s.duration;
          worst = std::max(worst, std::abs(sp.value(t0) - s.u1));
          worst = std::max(worst, std::abs(sp.rate(t0) - s.du1));
        }
      }
      ok = ok && worst < kSplineTol;
      detail += fmt(", spline %.1e", worst);
    }

    // Rotation / quaternion suite.
    {
      std::mt19937 rng(29);
      std::uniform_real_distribution<double> d(-1.0, 1.0);
      double worst = 0.0;
      for (int trial = 0; trial < 200; ++trial) {
        const Quaternion q = Quaternion(d(rng), {d(rng), d(rng), d(rng)}).normalized();
        const Eigen::Matrix3d R = q.rotation();
        worst = std::max(worst, (R * R.transpose() - Eigen::Matrix3d::Identity()).norm());
        worst = std::max(worst, std::abs(R.determinant() - 1.0));
        worst = std::max(worst, std::abs(q.coeffs_wxyz().norm() - 1.0));
        const Eigen::Vector3d rpy{1.2 * d(rng), 1.2 * d(rng), 1.2 * d(rng)};
        const Quaternion qe = Quaternion::from_euler_zyx(rpy);
        worst = std::max(worst, (qe.euler_zyx() - rpy).norm());
      }
      ok = ok && worst < kSo3Tol;
      detail += fmt(", so3 %.1e", worst);
    }

    // Free-floating momentum conservation.
    {
      Simulator sim(case1.model);
      BodyState b;
      b.position = {0.0, 0.0, 1.0};
      b.velocity = {0.01, -0.02, 0.01};
      b.omega = {0.03, 0.02, -0.01};
      const int nj = case1.model.arm_count() * case1.model.joints_per_arm();
      Eigen::VectorXd q0(nj), dq0(nj);
      std::mt19937 rng(31);
      std::uniform_real_distribution<double> d(-0.2, 0.2);
      for (int i = 0; i < nj; ++i) {
        q0[i] = d(rng);
        dq0[i] = 0.5 * d(rng);
      }
      sim.reset(b, q0, dq0);
      const Eigen::Vector3d P0 = sim.linear_momentum(), L0 = sim.angular_momentum();
      for (int k = 0; k < 400; ++k)
        sim.step(Eigen::VectorXd::Zero(nj), Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(),
                 0.005);
      const double drift = std::max((sim.linear_momentum() - P0).norm(),
                                    (sim.angular_momentum() - L0).norm());
      ok = ok && drift < kMomentumTol;
      detail += fmt(", momentum %.1e", drift);
    }

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ok = ok && wall < kHygieneWallBound;
    report(9, "numerical hygiene suites stay green and fast", ok,
           detail + fmt(", wall %.1f s", wall));
  }

  const double total =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  std::printf("%d/9 criteria passed in %.1f s\n", 9 - failures, total);
  return failures == 0 ? 0 : 1;
}
