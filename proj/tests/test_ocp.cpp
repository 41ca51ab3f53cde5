#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <vector>

#include "armada/dual.hpp"
#include "armada/ocp_solution.hpp"
#include "armada/transcription.hpp"

using namespace armada;

namespace {

constexpr double kBaseZ = 0.6253345237791563;

OcpConfig small_config() {
  OcpConfig c;
  c.start.position = {0.0, 0.0, kBaseZ};
  c.goal.position = {0.45, 0.0, kBaseZ};
  c.duration = 8.0;
  c.contact_phases = 2;
  c.thruster_segments = 2;
  c.polys = 2;
  return c;
}

// Dense Jacobian row-major assembly from the colored sparse sweep.
Eigen::MatrixXd dense_jacobian(const Transcription& tr, const Eigen::VectorXd& x) {
  JacobianPattern pat = tr.pattern(x);
  SparseRows jac;
  Eigen::VectorXd eq, ineq, cost_terms;
  REQUIRE(tr.jacobian(x, pat, jac, eq, ineq, cost_terms));
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(tr.num_rows(), tr.num_vars());
  for (int r = 0; r < tr.num_rows(); ++r)
    for (const auto& [c, v] : jac.rows[r]) J(r, c) = v;
  return J;
}

Eigen::VectorXd stacked_values(const Transcription& tr, const Eigen::VectorXd& x) {
  Eigen::VectorXd eq, ineq;
  double cost = 0.0;
  tr.eval(x, eq, ineq, cost);
  Eigen::VectorXd out(tr.num_eq() + tr.num_ineq() + 1);
  out << eq, ineq, cost;
  return out;
}

}  // namespace

TEST_CASE("dual numbers propagate exact derivatives through the scalar kernel") {
  Dual<2> x(0.7), y(-0.4);
  x.d[0] = 1.0;
  y.d[1] = 1.0;
  const Dual<2> f = sin(x * y) + exp(x) / (Dual<2>(1.0) + y * y) + sqrt(x + Dual<2>(2.0));
  const double fx = std::cos(0.7 * -0.4) * -0.4 + std::exp(0.7) / (1.0 + 0.16) +
                    0.5 / std::sqrt(2.7);
  const double fy = std::cos(0.7 * -0.4) * 0.7 -
                    std::exp(0.7) * (2.0 * -0.4) / ((1.0 + 0.16) * (1.0 + 0.16));
  CHECK(f.d[0] == doctest::Approx(fx).epsilon(1e-12));
  CHECK(f.d[1] == doctest::Approx(fy).epsilon(1e-12));
}

TEST_CASE("problem layout carries a consistent seed") {
  const RobotModel model = load_robot_model("models/default_robot.json");
  const OcpProblem p = build_problem(model, HeightMap::flat(0.0), small_config());

  CHECK(p.nx > 0);
  CHECK(p.x_seed.size() == p.nx);
  CHECK(p.x_scale.size() == p.nx);
  CHECK(p.x_scale.minCoeff() > 0.0);

  const OcpSolution seed = decode_solution(p, p.x_seed);
  CHECK((seed.base_position(0.0) - p.config.start.position).norm() < 1e-9);
  CHECK((seed.base_position(p.config.duration) - p.config.goal.position).norm() < 1e-9);
  CHECK(seed.schedule.horizon() == doctest::Approx(p.config.duration));
  // Docked start: contact first, 2N-1 phases per arm.
  for (int a = 0; a < p.arm_count(); ++a) {
    CHECK(seed.schedule.timeline(a).first == PhaseKind::Contact);
    CHECK(static_cast<int>(seed.schedule.timeline(a).durations.size()) ==
          2 * p.config.contact_phases - 1);
  }
}

TEST_CASE("build rejects inconsistent configurations") {
  const RobotModel model = load_robot_model("models/default_robot.json");
  OcpConfig bad = small_config();
  bad.duration = -1.0;
  CHECK_THROWS(build_problem(model, HeightMap::flat(0.0), bad));
  bad = small_config();
  bad.defect_nodes = 4;  // must be odd
  CHECK_THROWS(build_problem(model, HeightMap::flat(0.0), bad));
  bad = small_config();
  bad.start.rpy = {0.0, 1.57, 0.0};  // near gimbal lock
  CHECK_THROWS(build_problem(model, HeightMap::flat(0.0), bad));
}

TEST_CASE("analytic jacobian matches central differences on every slice") {
  const RobotModel model = load_robot_model("models/default_robot.json");
  const OcpProblem p = build_problem(model, HeightMap::flat(0.0), small_config());
  Transcription tr(p);

  std::mt19937 rng(3);
  std::normal_distribution<double> noise(0.0, 0.02);

  Eigen::VectorXd x = p.x_seed;
  for (int i = 0; i < x.size(); ++i) x[i] += noise(rng);

  const Eigen::MatrixXd J = dense_jacobian(tr, x);
  Eigen::VectorXd ct;
  {
    JacobianPattern pat = tr.pattern(x);
    SparseRows jac;
    Eigen::VectorXd e, q;
    REQUIRE(tr.jacobian(x, pat, jac, e, q, ct));
  }
  const double h = 1e-6;

  // Directional probes: J w vs the centered difference of the stacked values.
  std::map<std::string, double> worst;
  double worst_cost = 0.0;
  for (int probe = 0; probe < 20; ++probe) {
    Eigen::VectorXd w(x.size());
    for (int i = 0; i < w.size(); ++i) w[i] = noise(rng);
    w.normalize();
    const Eigen::VectorXd fp = stacked_values(tr, x + h * w);
    const Eigen::VectorXd fm = stacked_values(tr, x - h * w);
    const Eigen::VectorXd fd = (fp - fm) / (2.0 * h);

    // Constraint rows, grouped per slice.
    for (const SliceInfo& s : tr.slices()) {
      if (s.kind == SliceKind::Cost) continue;
      const int offset = s.kind == SliceKind::Equality ? 0 : tr.num_eq();
      double err = 0.0;
      for (int r = s.begin; r < s.end; ++r) {
        const int row = offset + r;
        const double analytic = J.row(row).dot(w);
        const double scale = std::max(1.0, std::abs(fd[row]));
        err = std::max(err, std::abs(analytic - fd[row]) / scale);
      }
      worst[s.name] = std::max(worst[s.name], err);
    }

    // Total cost: sum of squared residual rows, so d(cost) = sum 2 t_r J_r.
    double dcost = 0.0;
    for (int r = 0; r < tr.num_cost_terms(); ++r)
      dcost += 2.0 * ct[r] * J.row(tr.num_eq() + tr.num_ineq() + r).dot(w);
    const double fd_cost = fd[fd.size() - 1];
    worst_cost = std::max(worst_cost,
                          std::abs(dcost - fd_cost) / std::max(1.0, std::abs(fd_cost)));
  }

  for (const auto& [name, err] : worst) {
    INFO("slice ", name, " gradient error ", err);
    CHECK(err < 1e-4);
  }
  INFO("cost gradient error ", worst_cost);
  CHECK(worst_cost < 1e-4);
}

TEST_CASE("jacobian sweep reports pattern invalidation instead of stale values") {
  const RobotModel model = load_robot_model("models/default_robot.json");
  const OcpProblem p = build_problem(model, HeightMap::flat(0.0), small_config());
  Transcription tr(p);

  const JacobianPattern pat = tr.pattern(p.x_seed);
  SparseRows jac;
  Eigen::VectorXd eq, ineq, cost_terms;
  CHECK(tr.jacobian(p.x_seed, pat, jac, eq, ineq, cost_terms));
  CHECK(static_cast<int>(jac.rows.size()) == tr.num_rows());
  CHECK(eq.size() == tr.num_eq());
  CHECK(ineq.size() == tr.num_ineq());
  CHECK(cost_terms.size() == tr.num_cost_terms());

  // Values from the dual sweep agree with the plain evaluation.
  Eigen::VectorXd eq2, ineq2;
  double cost = 0.0;
  tr.eval(p.x_seed, eq2, ineq2, cost);
  CHECK((eq - eq2).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((ineq - ineq2).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK(cost == doctest::Approx(cost_terms.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("hover problem solves to tolerance and is deterministic") {
  const RobotModel model = load_robot_model("models/default_robot.json");
  OcpConfig c = small_config();
  c.goal = c.start;  // pure station keeping
  const OcpProblem p = build_problem(model, HeightMap::flat(0.0), c);

  SolverOptions opt;
  opt.max_outer = 30;
  const OcpOutcome a = solve_ocp(p, opt);
  CHECK(a.solution.stats.converged);
  CHECK(a.solution.stats.max_eq_violation < opt.eq_tol);
  CHECK(a.solution.stats.max_ineq_violation < opt.ineq_tol);
  CHECK((a.solution.base_position(0.0) - c.start.position).norm() < 1e-6);
  CHECK((a.solution.base_position(c.duration) - c.goal.position).norm() < 1e-6);

  const OcpOutcome b = solve_ocp(p, opt);
  CHECK((a.raw.x - b.raw.x).norm() == 0.0);  // bit-exact repeat
}

TEST_CASE("short translation solve satisfies the contact geometry") {
  const RobotModel model = load_robot_model("models/default_robot.json");
  const HeightMap map = HeightMap::flat(0.0);
  const OcpProblem p = build_problem(model, map, small_config());
  const OcpOutcome out = solve_ocp(p, SolverOptions{});
  REQUIRE(out.solution.stats.converged);
  const OcpSolution& sol = out.solution;

  // Contact feet stay pinned on the surface: zero velocity, map height.
  for (int a = 0; a < sol.arm_count(); ++a) {
    const auto bounds = sol.schedule.boundaries(a);
    for (std::size_t ph = 0; ph + 1 < bounds.size(); ++ph) {
      if (sol.schedule.timeline(a).kind(static_cast<int>(ph)) != PhaseKind::Contact) continue;
      for (double f : {0.1, 0.5, 0.9}) {
        const double t = bounds[ph] + f * (bounds[ph + 1] - bounds[ph]);
        const Eigen::Vector3d pos = sol.ee_position(a, t);
        CHECK(sol.ee_velocity(a, t).norm() < 5e-4);
        CHECK(std::abs(pos.z() - map.height_at(pos.x(), pos.y())) < 1e-4);
      }
    }
  }

  // Swing feet respect the clearance margin away from the ends.
  for (int a = 0; a < sol.arm_count(); ++a) {
    const auto bounds = sol.schedule.boundaries(a);
    for (std::size_t ph = 0; ph + 1 < bounds.size(); ++ph) {
      if (sol.schedule.timeline(a).kind(static_cast<int>(ph)) != PhaseKind::Swing) continue;
      for (double f : {0.3, 0.5, 0.7}) {
        const double t = bounds[ph] + f * (bounds[ph + 1] - bounds[ph]);
        const Eigen::Vector3d pos = sol.ee_position(a, t);
        CHECK(pos.z() - map.height_at(pos.x(), pos.y()) > p.config.clearance - 1e-5);
      }
    }
  }

  // Every arm stays inside its kinematic box relative to the base.
  for (double t = 0.0; t <= sol.duration(); t += 0.25) {
    const Eigen::Matrix3d R = Quaternion::from_euler_zyx(sol.base_rpy(t)).rotation();
    for (int a = 0; a < sol.arm_count(); ++a) {
      const Eigen::Vector3d rel =
          R.transpose() * (sol.ee_position(a, t) - sol.base_position(t)) - model.nominal_tool[a];
      for (int i = 0; i < 3; ++i)
        CHECK(std::abs(rel[i]) <= model.box_half_extents[i] + 1e-4);
    }
  }
}
