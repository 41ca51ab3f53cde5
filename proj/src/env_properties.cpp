#include "armada/env_properties.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace armada {

namespace {

RewardInputs neutral_inputs(int zeta, int jpa) {
  RewardInputs in;
  in.base_position_desired.setZero();
  in.base_position.setZero();
  in.ee_position_desired.assign(zeta, Eigen::Vector3d::Zero());
  in.ee_position.assign(zeta, Eigen::Vector3d::Zero());
  in.ee_attitude_desired.assign(zeta, Quaternion::identity());
  in.ee_attitude.assign(zeta, Quaternion::identity());
  in.dq = Eigen::VectorXd::Zero(zeta * jpa);
  in.tau = Eigen::VectorXd::Zero(zeta * jpa);
  in.ddq = Eigen::VectorXd::Zero(zeta * jpa);
  in.action_delta = Eigen::VectorXd::Zero(zeta * jpa);
  in.joints_per_arm = jpa;
  return in;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

bool all_pass(const std::vector<PropertyResult>& results) {
  for (const auto& r : results)
    if (!r.pass) return false;
  return true;
}

std::vector<PropertyResult> run_env_property_suite(const RobotModel& model, const EnvConfig& cfg,
                                                   uint64_t seed, int noise_samples) {
  std::vector<PropertyResult> out;
  const int zeta = model.arm_count(), jpa = model.joints_per_arm();
  const int nj = zeta * jpa;
  auto push = [&](const std::string& name, bool pass, const std::string& detail = "") {
    out.push_back({name, pass, detail});
  };

  {
    Env env(model, cfg, seed);
    const int expect = 13 + 7 + 2 * nj + (nj + 3) + 14 * zeta;
    const bool ok = env.observation_size() == expect && env.action_size() == nj + 3 &&
                    env.reset(seed).size() == expect;
    push("observation_action_dimensions", ok,
         "obs " + std::to_string(env.observation_size()) + ", action " +
             std::to_string(env.action_size()));
  }

  {
    // R_body and R_ee strictly decrease with the respective position error
    bool mono = true;
    double prev_body = 0.0, prev_ee = 0.0;
    for (int i = 0; i <= 40; ++i) {
      const double e = 1e-3 * std::pow(1000.0, i / 40.0);  // 1e-3 .. 1 m
      RewardInputs in = neutral_inputs(zeta, jpa);
      in.base_position[0] = e;
      const double body = evaluate_reward(cfg.weights, in).body;
      RewardInputs in2 = neutral_inputs(zeta, jpa);
      in2.ee_position[0][0] = e;
      const double ee = evaluate_reward(cfg.weights, in2).ee;
      if (i > 0 && (body >= prev_body || ee >= prev_ee)) mono = false;
      prev_body = body;
      prev_ee = ee;
    }
    push("reward_monotone_in_pose_error", mono);
  }

  {
    RewardInputs in = neutral_inputs(zeta, jpa);
    const RewardBreakdown r = evaluate_reward(cfg.weights, in);
    const double expect = cfg.weights.body * (-2.0 * std::log(cfg.weights.eps));
    const bool ok = std::abs(r.body - expect) < 1e-9 * std::abs(expect) && r.power == 0.0 &&
                    r.acc == 0.0 && r.bacc == 0.0 && r.act == 0.0 && r.thruster == 0.0;
    push("reward_zero_error_values", ok, "body " + fmt(r.body) + " vs " + fmt(expect));
  }

  {
    RewardInputs in = neutral_inputs(zeta, jpa);
    in.arm_collisions = 2;
    in.body_collision = true;
    const RewardBreakdown r = evaluate_reward(cfg.weights, in);
    const double pen = r.collision + r.body_collision;
    push("reward_collision_penalties", pen == 2.0 * cfg.weights.collision + cfg.weights.body_collision,
         "penalty " + fmt(pen));
  }

  {
    std::mt19937_64 rng(seed + 1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    bool ok = true;
    for (int trial = 0; trial < 200; ++trial) {
      RewardInputs in = neutral_inputs(zeta, jpa);
      in.base_position = Eigen::Vector3d(u(rng), u(rng), u(rng));
      in.base_attitude = Quaternion::from_euler_zyx({0.3 * u(rng), 0.3 * u(rng), 0.3 * u(rng)});
      for (int a = 0; a < zeta; ++a) {
        in.ee_position[a] = Eigen::Vector3d(u(rng), u(rng), u(rng));
        in.ee_attitude[a] = Quaternion::from_euler_zyx({0.3 * u(rng), 0.3 * u(rng), 0.3 * u(rng)});
      }
      for (int i = 0; i < nj; ++i) {
        in.dq[i] = u(rng);
        in.tau[i] = 20.0 * u(rng);
        in.ddq[i] = 5.0 * u(rng);
        in.action_delta[i] = 0.2 * u(rng);
      }
      in.base_linear_accel = Eigen::Vector3d(u(rng), u(rng), u(rng));
      in.base_angular_accel = Eigen::Vector3d(u(rng), u(rng), u(rng));
      in.thrust = Eigen::Vector3d(30.0 * u(rng), 30.0 * u(rng), 30.0 * u(rng));
      in.arm_collisions = trial % 3;
      const RewardBreakdown r = evaluate_reward(cfg.weights, in);
      const double sum = r.body + r.ee + r.power + r.acc + r.bacc + r.act + r.thruster +
                         r.collision + r.body_collision;
      if (sum != r.total) ok = false;
    }
    push("reward_breakdown_sums_exactly", ok);
  }

  {
    EnvConfig noisy = cfg;
    noisy.noise.enabled = true;
    Env env(model, noisy, seed + 2);
    env.reset(seed + 2);
    const Eigen::VectorXd clean = env.observation(false);
    const NoiseRanges& n = noisy.noise;
    double slack = 1e-9;
    bool ok = true;
    const Quaternion clean_att(clean[3], clean[4], clean[5], clean[6]);
    for (int s = 0; s < noise_samples && ok; ++s) {
      const Eigen::VectorXd o = env.observation(true);
      for (int i = 0; i < 3; ++i)
        if (std::abs(o[i] - clean[i]) > n.base_position + slack) ok = false;
      const Quaternion att(o[3], o[4], o[5], o[6]);
      const Eigen::Vector3d drpy = att.euler_zyx() - clean_att.euler_zyx();
      for (int i = 0; i < 3; ++i)
        if (std::abs(drpy[i]) > n.base_orientation + 1e-6) ok = false;
      for (int i = 7; i < 10; ++i)
        if (std::abs(o[i] - clean[i]) > n.linear_velocity + slack) ok = false;
      for (int i = 10; i < 13; ++i)
        if (std::abs(o[i] - clean[i]) > n.angular_velocity + slack) ok = false;
      for (int i = 13; i < 20; ++i)
        if (o[i] != clean[i]) ok = false;  // desired base pose stays clean
      for (int i = 20; i < 20 + nj; ++i)
        if (std::abs(o[i] - clean[i]) > n.joint_position + slack) ok = false;
      for (int i = 20 + nj; i < 20 + 2 * nj; ++i)
        if (std::abs(o[i] - clean[i]) > n.joint_velocity + slack) ok = false;
      for (int i = 20 + 2 * nj; i < static_cast<int>(o.size()); ++i)
        if (o[i] != clean[i]) ok = false;  // action and EE channels stay clean
    }
    push("noise_bounds_respected", ok,
         std::to_string(noise_samples) + " samples within Table bounds");
  }

  {
    Env env(model, cfg, seed + 3);
    bool ok = true;
    double mass_lo = 1e30, mass_hi = -1e30;
    for (int i = 0; i < 1000; ++i) {
      env.reset();
      const double m = env.system_mass();
      mass_lo = std::min(mass_lo, m);
      mass_hi = std::max(mass_hi, m);
      const double lim = (1.0 + cfg.randomization.mass_fraction) * model.total_mass + 1e-9;
      const double lim_lo = (1.0 - cfg.randomization.mass_fraction) * model.total_mass - 1e-9;
      if (m > lim || m < lim_lo) ok = false;
      const Eigen::Vector3d dp =
          env.simulator().state().base.position - cfg.nominal_base_position;
      if ((dp.cwiseAbs().array() > cfg.randomization.base_position + 1e-12).any()) ok = false;
      for (int k = 0; k < nj; ++k) {
        const double d0 = cfg.default_posture[k % jpa];
        const double bound =
            std::abs(d0) * cfg.randomization.joint_fraction + cfg.randomization.joint_position;
        if (std::abs(env.simulator().state().q[k] - d0) > bound + 1e-12) ok = false;
      }
    }
    push("reset_randomization_bounds", ok,
         "mass range [" + fmt(mass_lo) + ", " + fmt(mass_hi) + "] kg over 1000 resets");
  }

  {
    Env env(model, cfg, seed + 4);
    env.reset(seed + 4);
    Eigen::VectorXd hold(env.action_size());
    hold.head(nj) = env.simulator().state().q;
    hold.tail<3>().setZero();
    int steps = 0;
    bool terminated = false;
    while (!env.episode_over()) {
      const EnvTransition tr = env.step(hold);
      ++steps;
      terminated = tr.terminated;
    }
    const bool ok = steps == cfg.steps_to_timeout() && !terminated;
    push("episode_step_accounting", ok,
         std::to_string(steps) + " steps to timeout, expected " +
             std::to_string(cfg.steps_to_timeout()));
  }

  {
    Env a(model, cfg, seed + 5), b(model, cfg, seed + 5);
    Eigen::VectorXd oa = a.reset(99), ob = b.reset(99);
    bool ok = (oa.array() == ob.array()).all();
    std::mt19937_64 rng(seed + 6);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    for (int s = 0; s < 50 && ok; ++s) {
      Eigen::VectorXd act(a.action_size());
      for (int i = 0; i < act.size(); ++i) act[i] = u(rng);
      act.head(nj) += a.simulator().state().q;
      const EnvTransition ta = a.step(act);
      const EnvTransition tb = b.step(act);
      if (!(ta.observation.array() == tb.observation.array()).all()) ok = false;
      if (ta.reward.total != tb.reward.total) ok = false;
    }
    push("seeded_determinism", ok);
  }

  {
    Env env(model, cfg, seed + 7);
    env.reset(seed + 7);
    Eigen::VectorXd act = Eigen::VectorXd::Constant(env.action_size(), 1e6);
    const EnvTransition tr = env.step(act);
    const int off = 20 + 2 * nj;  // previous-action block
    bool ok = true;
    for (int i = 0; i < nj; ++i)
      if (std::abs(tr.observation[off + i]) > model.joint_limit + 1e-12) ok = false;
    for (int i = 0; i < 3; ++i)
      if (std::abs(tr.observation[off + nj + i]) > model.thruster_limit + 1e-12) ok = false;
    push("action_clamped_to_limits", ok);
  }

  {
    Env env(model, cfg, seed + 8);
    const double r0 = env.base_target_range();
    bool ok = env.curriculum_update(cfg.curriculum.trigger - 0.01) ==
              r0 + cfg.curriculum.expansion;
    ok = ok && env.curriculum_update(cfg.curriculum.trigger + 0.01) ==
                   r0 + cfg.curriculum.expansion;  // above trigger: unchanged
    for (int i = 0; i < 4; ++i) env.curriculum_update(0.0);
    ok = ok && std::abs(env.base_target_range() - (r0 + 5.0 * cfg.curriculum.expansion)) < 1e-15;
    push("curriculum_expansion_rule", ok, "range " + fmt(env.base_target_range()));
  }

  {
    // thruster-driven descent must end with a terminal body collision
    Env env(model, cfg, seed + 9);
    BodyState b;
    b.position = Eigen::Vector3d(0.0, 0.0, cfg.ground_z + model.body_half_extents.z() + 0.05);
    Eigen::VectorXd q0 = Eigen::VectorXd::Zero(nj);
    for (int i = 0; i < nj; ++i) q0[i] = cfg.default_posture[i % jpa];
    env.reset_to(b, q0);
    Eigen::VectorXd act(env.action_size());
    act.head(nj) = q0;
    act.tail<3>() = Eigen::Vector3d(0.0, 0.0, -model.thruster_limit);
    bool terminated = false;
    double last_pen = 0.0;
    for (int s = 0; s < cfg.steps_to_timeout() && !env.episode_over(); ++s) {
      const EnvTransition tr = env.step(act);
      terminated = tr.terminated;
      last_pen = tr.reward.body_collision;
    }
    bool threw = false;
    if (terminated) {
      try {
        env.step(act);
      } catch (const std::runtime_error&) {
        threw = true;
      }
    }
    push("body_collision_terminates", terminated && last_pen == cfg.weights.body_collision && threw,
         "final penalty " + fmt(last_pen));
  }

  return out;
}

}  // namespace armada
