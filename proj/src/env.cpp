#include "armada/env.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "armada/arm_kinematics.hpp"

namespace armada {

namespace {

using nlohmann::json;

Quaternion quat_from_matrix(const Eigen::Matrix3d& R) {
  const Eigen::Quaterniond q(R);
  return Quaternion(q.w(), q.x(), q.y(), q.z()).normalized();
}

Eigen::Vector3d get_vec3(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

}  // namespace

EnvConfig load_env_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("env config: cannot open " + path);
  json j;
  in >> j;

  EnvConfig c;
  c.control_rate = j.value("control_rate", c.control_rate);
  c.substeps = j.value("substeps", c.substeps);
  c.episode_seconds = j.value("episode_seconds", c.episode_seconds);
  if (j.contains("weights")) {
    const json& w = j["weights"];
    c.weights.body = w.value("body", c.weights.body);
    c.weights.ee = w.value("ee", c.weights.ee);
    c.weights.eps = w.value("eps", c.weights.eps);
    c.weights.power = w.value("power", c.weights.power);
    c.weights.acc = w.value("acc", c.weights.acc);
    c.weights.bacc = w.value("bacc", c.weights.bacc);
    c.weights.act = w.value("act", c.weights.act);
    c.weights.thruster = w.value("thruster", c.weights.thruster);
    c.weights.collision = w.value("collision", c.weights.collision);
    c.weights.body_collision = w.value("body_collision", c.weights.body_collision);
  }
  if (j.contains("randomization")) {
    const json& r = j["randomization"];
    c.randomization.base_position = r.value("base_position", c.randomization.base_position);
    c.randomization.joint_position = r.value("joint_position", c.randomization.joint_position);
    c.randomization.joint_fraction = r.value("joint_fraction", c.randomization.joint_fraction);
    c.randomization.mass_fraction = r.value("mass_fraction", c.randomization.mass_fraction);
  }
  if (j.contains("noise")) {
    const json& n = j["noise"];
    c.noise.enabled = n.value("enabled", c.noise.enabled);
    c.noise.base_position = n.value("base_position", c.noise.base_position);
    c.noise.base_orientation = n.value("base_orientation", c.noise.base_orientation);
    c.noise.linear_velocity = n.value("linear_velocity", c.noise.linear_velocity);
    c.noise.angular_velocity = n.value("angular_velocity", c.noise.angular_velocity);
    c.noise.joint_position = n.value("joint_position", c.noise.joint_position);
    c.noise.joint_velocity = n.value("joint_velocity", c.noise.joint_velocity);
  }
  if (j.contains("curriculum")) {
    const json& k = j["curriculum"];
    c.curriculum.trigger = k.value("trigger", c.curriculum.trigger);
    c.curriculum.expansion = k.value("expansion", c.curriculum.expansion);
    c.curriculum.initial_base_range = k.value("initial_base_range", c.curriculum.initial_base_range);
    c.curriculum.ee_sphere = k.value("ee_sphere", c.curriculum.ee_sphere);
  }
  if (j.contains("nominal_base_position")) c.nominal_base_position = get_vec3(j["nominal_base_position"]);
  if (j.contains("nominal_base_rpy")) c.nominal_base_rpy = get_vec3(j["nominal_base_rpy"]);
  if (j.contains("default_posture")) {
    const json& d = j["default_posture"];
    c.default_posture.resize(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) c.default_posture[i] = d[i].get<double>();
  }
  if (j.contains("target_change_times"))
    c.target_change_times = j["target_change_times"].get<std::vector<double>>();
  c.ground_z = j.value("ground_z", c.ground_z);

  if (!(c.control_rate > 0.0) || c.substeps < 1 || !(c.episode_seconds > 0.0))
    throw std::runtime_error("env config: rates and episode length must be positive");
  return c;
}

RewardBreakdown evaluate_reward(const RewardWeights& w, const RewardInputs& in) {
  RewardBreakdown r;
  const double eps = w.eps;

  const double dpos = (in.base_position_desired - in.base_position).norm();
  const double dang = in.base_attitude_desired.angle_to(in.base_attitude);
  r.body = w.body * (-std::log(dpos + eps) - std::log(dang + eps));

  double ee = 0.0;
  for (std::size_t i = 0; i < in.ee_position.size(); ++i) {
    const double ep = (in.ee_position_desired[i] - in.ee_position[i]).norm();
    const double ea = in.ee_attitude_desired[i].angle_to(in.ee_attitude[i]);
    ee += -std::log(ep + eps) - std::log(ea + eps);
  }
  r.ee = w.ee * ee;

  double pow_sum = 0.0;
  const int n = in.joints_per_arm;
  for (int a = 0; a * n + n <= in.dq.size(); ++a) {
    const double p = in.dq.segment(a * n, n).dot(in.tau.segment(a * n, n));
    pow_sum += p * p;
  }
  r.power = w.power * pow_sum;
  r.acc = w.acc * in.ddq.squaredNorm();
  r.bacc = w.bacc * (in.base_linear_accel.norm() + in.base_angular_accel.norm());
  r.act = w.act * in.action_delta.squaredNorm();
  r.thruster = w.thruster * in.thrust.norm();
  r.collision = w.collision * in.arm_collisions;
  r.body_collision = in.body_collision ? w.body_collision : 0.0;

  // fixed summation order; the breakdown test recomputes it verbatim
  r.total = r.body + r.ee + r.power + r.acc + r.bacc + r.act + r.thruster +
            r.collision + r.body_collision;
  return r;
}

Env::Env(RobotModel model, EnvConfig cfg, uint64_t seed)
    : model_(std::move(model)),
      cfg_(std::move(cfg)),
      map_(HeightMap::flat(cfg_.ground_z)),
      sim_(model_),
      rng_(seed),
      base_range_(cfg_.curriculum.initial_base_range) {
  if (cfg_.default_posture.size() == 0)
    cfg_.default_posture = Eigen::VectorXd::Zero(model_.joints_per_arm());
  if (cfg_.default_posture.size() != model_.joints_per_arm())
    throw std::invalid_argument("env: default posture length mismatch");
  const int zeta = model_.arm_count();
  ee_target_pos_.resize(zeta);
  ee_target_att_.resize(zeta);
  prev_action_ = Eigen::VectorXd::Zero(action_size());
}

int Env::observation_size() const {
  const int zeta = model_.arm_count(), nj = zeta * model_.joints_per_arm();
  return 13 + 7 + 2 * nj + (nj + 3) + 14 * zeta;
}

int Env::action_size() const { return model_.arm_count() * model_.joints_per_arm() + 3; }

Eigen::VectorXd Env::reset(uint64_t seed) {
  rng_.seed(seed);
  return reset();
}

Eigen::VectorXd Env::reset() {
  const int zeta = model_.arm_count(), jpa = model_.joints_per_arm();
  const int nj = zeta * jpa;
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  // Mass randomization scales every body (fuel level); inertia follows mass.
  mass_scale_ = 1.0 + cfg_.randomization.mass_fraction * u(rng_);
  RobotModel scaled = model_;
  scaled.total_mass *= mass_scale_;
  scaled.body_mass *= mass_scale_;
  scaled.arm_base_mass *= mass_scale_;
  scaled.inertia *= mass_scale_;
  scaled.arm_base_inertia *= mass_scale_;
  for (ArmChain& arm : scaled.arms) {
    for (LinkParams& l : arm.links) {
      l.mass *= mass_scale_;
      l.inertia *= mass_scale_;
    }
  }
  sim_ = Simulator(scaled);

  BodyState b;
  b.position = cfg_.nominal_base_position +
               cfg_.randomization.base_position * Eigen::Vector3d(u(rng_), u(rng_), u(rng_));
  b.attitude = Quaternion::from_euler_zyx(cfg_.nominal_base_rpy);
  Eigen::VectorXd q(nj);
  for (int i = 0; i < nj; ++i) {
    const double base = cfg_.default_posture[i % jpa];
    q[i] = base * (1.0 + cfg_.randomization.joint_fraction * u(rng_)) +
           cfg_.randomization.joint_position * u(rng_);
  }
  sim_.reset(b, q, Eigen::VectorXd::Zero(nj));

  step_count_ = 0;
  terminated_ = truncated_ = false;
  was_reset_ = true;
  prev_action_.head(nj) = q;
  prev_action_.tail<3>().setZero();
  pending_target_changes_ = cfg_.target_change_times;
  std::sort(pending_target_changes_.begin(), pending_target_changes_.end());
  sample_targets(false);
  return observation(cfg_.noise.enabled);
}

Eigen::VectorXd Env::reset_to(const BodyState& base, const Eigen::VectorXd& q) {
  const int nj = model_.arm_count() * model_.joints_per_arm();
  if (q.size() != nj) throw std::invalid_argument("env: joint vector size mismatch");
  mass_scale_ = 1.0;
  sim_ = Simulator(model_);
  sim_.reset(base, q, Eigen::VectorXd::Zero(nj));
  step_count_ = 0;
  terminated_ = truncated_ = false;
  was_reset_ = true;
  prev_action_.head(nj) = q;
  prev_action_.tail<3>().setZero();
  pending_target_changes_.clear();
  base_target_pos_ = base.position;
  base_target_att_ = base.attitude.normalized();
  const Eigen::Matrix3d R = base_target_att_.rotation();
  for (int a = 0; a < model_.arm_count(); ++a) {
    const ArmFrames f =
        arm_frames(model_.arms[a], q.segment(a * model_.joints_per_arm(), model_.joints_per_arm()));
    ee_target_pos_[a] = base.position + R * f.tool.position;
    ee_target_att_[a] = quat_from_matrix(R * f.tool.rotation);
  }
  return observation(false);
}

void Env::sample_targets(bool ee_only) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  if (!ee_only) {
    base_target_pos_ = cfg_.nominal_base_position +
                       base_range_ * Eigen::Vector3d(u(rng_), u(rng_), u(rng_));
    base_target_att_ = Quaternion::from_euler_zyx(cfg_.nominal_base_rpy);
  }
  const Eigen::Matrix3d Rd = base_target_att_.rotation();
  for (int a = 0; a < model_.arm_count(); ++a) {
    // uniform in a sphere around the nominal tool point under the target pose
    Eigen::Vector3d dir(u(rng_), u(rng_), u(rng_));
    while (dir.norm() < 1e-9) dir = Eigen::Vector3d(u(rng_), u(rng_), u(rng_));
    dir.normalize();
    const double rad = cfg_.curriculum.ee_sphere * std::cbrt(u01(rng_));
    ee_target_pos_[a] = base_target_pos_ + Rd * model_.nominal_tool[a] + rad * dir;
    const ArmFrames f = arm_frames(model_.arms[a], Eigen::VectorXd::Zero(model_.joints_per_arm()));
    ee_target_att_[a] = quat_from_matrix(Rd * f.tool.rotation);
  }
}

void Env::set_base_target(const Eigen::Vector3d& pos, const Quaternion& att) {
  base_target_pos_ = pos;
  base_target_att_ = att.normalized();
}

void Env::set_ee_target(int arm, const Eigen::Vector3d& pos, const Quaternion& att) {
  ee_target_pos_.at(arm) = pos;
  ee_target_att_.at(arm) = att.normalized();
}

void Env::detect_collisions(int* arm_hits, bool* body_hit) const {
  *arm_hits = 0;
  *body_hit = false;
  const SimState& s = sim_.state();
  const Eigen::Matrix3d R = s.base.attitude.rotation();
  const int jpa = model_.joints_per_arm();
  for (int a = 0; a < model_.arm_count(); ++a) {
    const ArmFrames f = arm_frames(model_.arms[a], s.q.segment(a * jpa, jpa));
    bool hit = false;
    // every joint origin from the elbow out, but not the tool: EE contact is allowed
    for (int j = 2; j < jpa; ++j) {
      const Eigen::Vector3d p = s.base.position + R * f.joint[j].position;
      if (p.z() < map_.height_at(p.x(), p.y())) hit = true;
    }
    if (hit) ++*arm_hits;
  }
  const Eigen::Vector3d h = model_.body_half_extents;
  for (int cx = -1; cx <= 1; cx += 2)
    for (int cy = -1; cy <= 1; cy += 2)
      for (int cz = -1; cz <= 1; cz += 2) {
        const Eigen::Vector3d corner =
            s.base.position + R * Eigen::Vector3d(cx * h.x(), cy * h.y(), cz * h.z());
        if (corner.z() < map_.height_at(corner.x(), corner.y())) *body_hit = true;
      }
}

EnvTransition Env::step(const Eigen::VectorXd& action) {
  if (!was_reset_) throw std::runtime_error("env: step before reset");
  if (terminated_ || truncated_) throw std::runtime_error("env: step after episode end");
  if (action.size() != action_size()) throw std::invalid_argument("env: action size mismatch");

  const int zeta = model_.arm_count(), jpa = model_.joints_per_arm();
  const int nj = zeta * jpa;
  const double t0 = step_count_ / cfg_.control_rate;
  const double dt_policy = 1.0 / cfg_.control_rate;
  const double dt_inner = dt_policy / cfg_.substeps;

  while (!pending_target_changes_.empty() && t0 >= pending_target_changes_.front() - 1e-9) {
    pending_target_changes_.erase(pending_target_changes_.begin());
    sample_targets(true);
  }

  Eigen::VectorXd q_star =
      action.head(nj).cwiseMax(-model_.joint_limit).cwiseMin(model_.joint_limit);
  const Eigen::Vector3d thrust =
      action.tail<3>().cwiseMax(-model_.thruster_limit).cwiseMin(model_.thruster_limit);

  const Eigen::VectorXd dq0 = sim_.state().dq;
  const Eigen::Vector3d v0 = sim_.state().base.velocity;
  const Eigen::Vector3d w0 = sim_.state().base.omega;

  Eigen::VectorXd tau(nj);
  for (int s = 0; s < cfg_.substeps; ++s) {
    tau = model_.kp_default * (q_star - sim_.state().q) - model_.kd_default * sim_.state().dq;
    for (int i = 0; i < nj; ++i) {
      const double lim = model_.torque_limit[i % jpa];
      tau[i] = std::clamp(tau[i], -lim, lim);
    }
    sim_.step(tau, thrust, Eigen::Vector3d::Zero(), dt_inner);
  }

  int arm_hits = 0;
  bool body_hit = false;
  detect_collisions(&arm_hits, &body_hit);

  RewardInputs in;
  in.base_position_desired = base_target_pos_;
  in.base_position = sim_.state().base.position;
  in.base_attitude_desired = base_target_att_;
  in.base_attitude = sim_.state().base.attitude;
  in.ee_position_desired = ee_target_pos_;
  in.ee_attitude_desired = ee_target_att_;
  in.ee_position.resize(zeta);
  in.ee_attitude.resize(zeta);
  const Eigen::Matrix3d R = sim_.state().base.attitude.rotation();
  for (int a = 0; a < zeta; ++a) {
    const ArmFrames f = arm_frames(model_.arms[a], sim_.state().q.segment(a * jpa, jpa));
    in.ee_position[a] = sim_.state().base.position + R * f.tool.position;
    in.ee_attitude[a] = quat_from_matrix(R * f.tool.rotation);
  }
  in.dq = sim_.state().dq;
  in.tau = tau;
  in.ddq = (sim_.state().dq - dq0) / dt_policy;
  in.base_linear_accel = (sim_.state().base.velocity - v0) / dt_policy;
  in.base_angular_accel = (sim_.state().base.omega - w0) / dt_policy;
  in.action_delta = q_star - prev_action_.head(nj);
  in.thrust = thrust;
  in.arm_collisions = arm_hits;
  in.body_collision = body_hit;
  in.joints_per_arm = jpa;

  EnvTransition tr;
  tr.reward = evaluate_reward(cfg_.weights, in);

  prev_action_.head(nj) = q_star;
  prev_action_.tail<3>() = thrust;
  ++step_count_;
  terminated_ = body_hit;
  truncated_ = !terminated_ && step_count_ >= cfg_.steps_to_timeout();

  tr.observation = observation(cfg_.noise.enabled);
  tr.terminated = terminated_;
  tr.truncated = truncated_;
  tr.step_index = step_count_;
  tr.time = step_count_ / cfg_.control_rate;
  return tr;
}

Eigen::VectorXd Env::observation(bool with_noise) {
  const int zeta = model_.arm_count(), jpa = model_.joints_per_arm();
  const int nj = zeta * jpa;
  const SimState& s = sim_.state();
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  Eigen::VectorXd obs(observation_size());
  int k = 0;

  Eigen::Vector3d pos = s.base.position;
  Quaternion att = s.base.attitude;
  Eigen::Vector3d vel = s.base.velocity;
  Eigen::Vector3d omg = s.base.omega;
  if (with_noise) {
    const NoiseRanges& n = cfg_.noise;
    pos += n.base_position * Eigen::Vector3d(u(rng_), u(rng_), u(rng_));
    const Eigen::Vector3d drpy =
        n.base_orientation * Eigen::Vector3d(u(rng_), u(rng_), u(rng_));
    att = Quaternion::from_euler_zyx(att.euler_zyx() + drpy);
    vel += n.linear_velocity * Eigen::Vector3d(u(rng_), u(rng_), u(rng_));
    omg += n.angular_velocity * Eigen::Vector3d(u(rng_), u(rng_), u(rng_));
  }
  obs.segment<3>(k) = pos; k += 3;
  obs.segment<4>(k) = att.coeffs_wxyz(); k += 4;
  obs.segment<3>(k) = vel; k += 3;
  obs.segment<3>(k) = omg; k += 3;

  obs.segment<3>(k) = base_target_pos_; k += 3;
  obs.segment<4>(k) = base_target_att_.coeffs_wxyz(); k += 4;

  for (int i = 0; i < nj; ++i)
    obs[k + i] = s.q[i] + (with_noise ? cfg_.noise.joint_position * u(rng_) : 0.0);
  k += nj;
  for (int i = 0; i < nj; ++i)
    obs[k + i] = s.dq[i] + (with_noise ? cfg_.noise.joint_velocity * u(rng_) : 0.0);
  k += nj;

  obs.segment(k, nj + 3) = prev_action_; k += nj + 3;

  // EE poses come from the clean state: they are model quantities, not sensors.
  const Eigen::Matrix3d R = s.base.attitude.rotation();
  for (int a = 0; a < zeta; ++a) {
    const ArmFrames f = arm_frames(model_.arms[a], s.q.segment(a * jpa, jpa));
    obs.segment<3>(k) = s.base.position + R * f.tool.position; k += 3;
    obs.segment<4>(k) = quat_from_matrix(R * f.tool.rotation).coeffs_wxyz(); k += 4;
  }
  for (int a = 0; a < zeta; ++a) {
    obs.segment<3>(k) = ee_target_pos_[a]; k += 3;
    obs.segment<4>(k) = ee_target_att_[a].coeffs_wxyz(); k += 4;
  }
  return obs;
}

double Env::curriculum_update(double mean_base_error) {
  if (mean_base_error < cfg_.curriculum.trigger) base_range_ += cfg_.curriculum.expansion;
  return base_range_;
}

BatchEnv::BatchEnv(const RobotModel& model, const EnvConfig& cfg,
                   const std::vector<uint64_t>& seeds) {
  envs_.reserve(seeds.size());
  for (uint64_t s : seeds) envs_.emplace_back(model, cfg, s);
}

std::vector<Eigen::VectorXd> BatchEnv::reset_all() {
  std::vector<Eigen::VectorXd> out;
  out.reserve(envs_.size());
  for (Env& e : envs_) out.push_back(e.reset());
  return out;
}

std::vector<EnvTransition> BatchEnv::step_all(const std::vector<Eigen::VectorXd>& actions) {
  if (actions.size() != envs_.size()) throw std::invalid_argument("batch: action count mismatch");
  std::vector<EnvTransition> out;
  out.reserve(envs_.size());
  for (std::size_t i = 0; i < envs_.size(); ++i) out.push_back(envs_[i].step(actions[i]));
  return out;
}

TrackingReport policy_rollout(Env& env, const Policy& policy, const OcpSolution& sol) {
  const double rate = env.config().control_rate;
  const int steps = std::min(env.config().steps_to_timeout(),
                             static_cast<int>(sol.duration() * rate + 0.5));
  const int zeta = sol.arm_count();

  // start on the plan: base at the planned start pose, joints from IK
  BodyState b0;
  b0.position = sol.base_position(0.0);
  b0.attitude = Quaternion::from_euler_zyx(sol.base_rpy(0.0));
  b0.velocity = sol.base_velocity(0.0);
  b0.omega = sol.omega_body(0.0);
  const RobotModel& model = env.simulator().robot();
  const int jpa = model.joints_per_arm();
  Eigen::VectorXd q0 = Eigen::VectorXd::Zero(zeta * jpa);
  const Eigen::Matrix3d R0 = b0.attitude.rotation();
  for (int a = 0; a < zeta; ++a) {
    Eigen::VectorXd qa = Eigen::VectorXd::Zero(jpa);
    ik_solve(model.arms[a], R0.transpose() * (sol.ee_position(a, 0.0) - b0.position), qa);
    q0.segment(a * jpa, jpa) = qa;
  }
  env.reset_to(b0, q0);
  TrackingReport rep;
  rep.controller = "policy";
  double sum_base = 0.0, sum_ee = 0.0, sum_att = 0.0;
  int n_ee = 0;

  for (int k = 0; k < steps; ++k) {
    const double t = k / rate;
    env.set_base_target(sol.base_position(t), Quaternion::from_euler_zyx(sol.base_rpy(t)));
    for (int a = 0; a < zeta; ++a) {
      // hold the planned orientation-free targets with the nominal tool attitude
      env.set_ee_target(a, sol.ee_position(a, t),
                        Quaternion::from_euler_zyx(sol.base_rpy(t)));
    }
    Eigen::VectorXd action = policy(env.observation(false));
    if (action.size() != env.action_size())
      throw std::invalid_argument("rollout: policy action size mismatch");
    const EnvTransition tr = env.step(action);

    TrackSample s;
    s.t = t;
    s.base_ref = sol.base_position(t);
    s.base_sim = env.simulator().state().base.position;
    s.base_error = (s.base_ref - s.base_sim).norm();
    s.ee_error.resize(zeta);
    for (int a = 0; a < zeta; ++a) {
      s.ee_error[a] = (sol.ee_position(a, t) - env.simulator().tool_position(a)).norm();
      sum_ee += s.ee_error[a];
      rep.max_ee_error = std::max(rep.max_ee_error, s.ee_error[a]);
      ++n_ee;
    }
    sum_base += s.base_error;
    sum_att += env.simulator().state().base.attitude.angle_to(
        Quaternion::from_euler_zyx(sol.base_rpy(t)));
    rep.max_base_error = std::max(rep.max_base_error, s.base_error);
    rep.trace.push_back(std::move(s));
    if (tr.terminated) break;
  }
  const int n = std::max(1, static_cast<int>(rep.trace.size()));
  rep.mean_base_error = sum_base / n;
  rep.mean_ee_error = sum_ee / std::max(1, n_ee);
  rep.mean_attitude_error = sum_att / n;
  rep.final_base_error = rep.trace.empty() ? 0.0 : rep.trace.back().base_error;
  return rep;
}

}  // namespace armada
