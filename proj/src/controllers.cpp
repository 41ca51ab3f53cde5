#include "armada/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "armada/arm_kinematics.hpp"

namespace armada {

bool ik_solve(const ArmChain& chain, const Eigen::Vector3d& target_body, Eigen::VectorXd& q,
              double damping, int max_iters, double tol) {
  for (int it = 0; it < max_iters; ++it) {
    const Eigen::Vector3d err = target_body - tool_position(chain, q);
    if (err.norm() < tol) return true;
    q += damped_least_squares(tool_jacobian(chain, q), err, damping);
  }
  return (target_body - tool_position(chain, q)).norm() < 1e-6;
}

TrackingReport track_solution(const RobotModel& model, const OcpSolution& sol,
                              const TrackerOptions& opt) {
  const int zeta = model.arm_count();
  const int jpa = model.joints_per_arm();
  const int nj = zeta * jpa;
  if (sol.arm_count() != zeta) throw std::invalid_argument("track: arm count mismatch");

  const double kp = opt.kp > 0.0 ? opt.kp : model.kp_default;
  const double kd = opt.kd > 0.0 ? opt.kd : model.kd_default;
  const double dt = 1.0 / opt.inner_rate;
  const int inner_per_task = std::max(1, static_cast<int>(std::lround(opt.inner_rate / opt.control_rate)));
  const double T = sol.duration();
  const int steps = static_cast<int>(std::lround(T * opt.inner_rate));

  Simulator sim(model, opt.sim);

  // Initial state matches the plan start; joints from IK of the start tools.
  BodyState b0;
  b0.position = sol.base_position(0.0);
  b0.attitude = Quaternion::from_euler_zyx(sol.base_rpy(0.0));
  b0.velocity = sol.base_velocity(0.0);
  b0.omega = sol.omega_body(0.0);
  const Eigen::Matrix3d R0 = b0.attitude.rotation();
  Eigen::VectorXd q0 = Eigen::VectorXd::Zero(nj);
  for (int a = 0; a < zeta; ++a) {
    const Eigen::Vector3d target_body = R0.transpose() * (sol.ee_position(a, 0.0) - b0.position);
    Eigen::VectorXd qa = Eigen::VectorXd::Zero(jpa);
    if (!ik_solve(model.arms[a], target_body, qa, opt.ik_damping))
      throw std::runtime_error("track: start posture IK failed");
    q0.segment(a * jpa, jpa) = qa;
  }
  sim.reset(b0, q0, Eigen::VectorXd::Zero(nj));
  for (int a = 0; a < zeta; ++a) {
    if (sol.schedule.in_contact(a, 0.0)) sim.dock(a, sim.tool_position(a));
  }

  Eigen::VectorXd q_des = q0, dq_des = Eigen::VectorXd::Zero(nj);

  TrackingReport rep;
  rep.controller = opt.kind == ControllerKind::DiffIk   ? "diff_ik"
                   : opt.kind == ControllerKind::JointPd ? "joint_pd"
                                                         : "impedance";
  double sum_base = 0.0, sum_ee = 0.0, sum_att = 0.0;
  int n_samples = 0, n_ee = 0;

  auto record = [&](double t) {
    TrackSample s;
    s.t = t;
    s.base_ref = sol.base_position(t);
    s.base_sim = sim.state().base.position;
    s.base_error = (s.base_ref - s.base_sim).norm();
    s.ee_error.resize(zeta);
    for (int a = 0; a < zeta; ++a)
      s.ee_error[a] = (sol.ee_position(a, t) - sim.tool_position(a)).norm();
    rep.trace.push_back(s);
    sum_base += s.base_error;
    rep.max_base_error = std::max(rep.max_base_error, s.base_error);
    sum_att += sim.state().base.attitude.angle_to(Quaternion::from_euler_zyx(sol.base_rpy(t)));
    for (int a = 0; a < zeta; ++a) {
      sum_ee += s.ee_error[a];
      rep.max_ee_error = std::max(rep.max_ee_error, s.ee_error[a]);
      ++n_ee;
    }
    ++n_samples;
  };
  record(0.0);

  for (int k = 0; k < steps; ++k) {
    const double t = k * dt;

    // Dock transitions follow the planned schedule; anchors are wherever the
    // tool actually is at touchdown.
    for (int a = 0; a < zeta; ++a) {
      const bool want = sol.schedule.in_contact(a, std::min(t, T));
      if (want && !sim.docked(a)) sim.dock(a, sim.tool_position(a));
      if (!want && sim.docked(a)) sim.release(a);
    }

    if (k % inner_per_task == 0 && opt.kind == ControllerKind::DiffIk) {
      for (int a = 0; a < zeta; ++a) {
        const Eigen::Vector3d err = sol.ee_position(a, t) - sim.tool_position(a);
        const Eigen::Vector3d v_cmd = sol.ee_velocity(a, t) + opt.ik_gain * err;
        const Eigen::MatrixXd jac = sim.tool_jacobian_world(a);
        const Eigen::VectorXd dqa = damped_least_squares(jac, v_cmd, opt.ik_damping);
        dq_des.segment(a * jpa, jpa) = dqa;
        q_des.segment(a * jpa, jpa) += dqa / opt.control_rate;
      }
    }
    if (k % inner_per_task == 0 && opt.kind == ControllerKind::JointPd) {
      // Open-loop joint targets: position IK of the planned relative geometry.
      const Eigen::Matrix3d Rp = Quaternion::from_euler_zyx(sol.base_rpy(t)).rotation();
      for (int a = 0; a < zeta; ++a) {
        const Eigen::Vector3d target_body =
            Rp.transpose() * (sol.ee_position(a, t) - sol.base_position(t));
        Eigen::VectorXd qa = q_des.segment(a * jpa, jpa);
        if (ik_solve(model.arms[a], target_body, qa, opt.ik_damping, 50))
          q_des.segment(a * jpa, jpa) = qa;
      }
    }

    Eigen::VectorXd tau(nj);
    if (opt.kind != ControllerKind::Impedance) {
      tau = kp * (q_des - sim.state().q) + kd * (dq_des - sim.state().dq);
    } else {
      const Eigen::VectorXd bias = sim.bias_vector();
      for (int a = 0; a < zeta; ++a) {
        const Eigen::Vector3d e = sol.ee_position(a, t) - sim.tool_position(a);
        const Eigen::Vector3d de = sol.ee_velocity(a, t) - sim.tool_velocity(a);
        Eigen::Vector3d f_task = opt.task_kp.cwiseProduct(e) + opt.task_kd.cwiseProduct(de);
        // Feedforward: exert the planned contact force on the terrain.
        f_task -= sol.contact_force(a, t);
        const Eigen::MatrixXd jac = sim.tool_jacobian_world(a);
        // Weak posture spring keeps the redundant joints from drifting.
        tau.segment(a * jpa, jpa) = jac.transpose() * f_task +
                                    bias.segment(6 + a * jpa, jpa) +
                                    2.0 * (q0.segment(a * jpa, jpa) - sim.state().q.segment(a * jpa, jpa)) -
                                    1.0 * sim.state().dq.segment(a * jpa, jpa);
      }
    }
    for (int i = 0; i < nj; ++i) {
      const double lim = model.torque_limit[i % jpa];
      tau[i] = std::clamp(tau[i], -lim, lim);
    }

    Eigen::Vector3d u = Eigen::Vector3d::Zero();
    if (opt.thruster_feedforward && sol.has_thrusters) {
      u = sol.thruster_body(std::min(t, T))
              .cwiseMax(-model.thruster_limit)
              .cwiseMin(model.thruster_limit);
    }

    sim.step(tau, u, Eigen::Vector3d::Zero(), dt);
    if ((k + 1) % inner_per_task == 0) record(std::min((k + 1) * dt, T));
  }

  rep.mean_base_error = sum_base / n_samples;
  rep.mean_ee_error = sum_ee / n_ee;
  rep.mean_attitude_error = sum_att / n_samples;
  rep.final_base_error = (sol.base_position(T) - sim.state().base.position).norm();
  return rep;
}

}  // namespace armada
