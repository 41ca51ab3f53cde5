#include "armada/rigid_body.hpp"

#include <cmath>

namespace armada {

Eigen::Matrix<double, 6, 1> split_thruster(const ThrusterCommand& u) {
  Eigen::Matrix<double, 6, 1> ch;
  for (int k = 0; k < 3; ++k) {
    ch(2 * k) = std::max(u(k), 0.0);
    ch(2 * k + 1) = std::max(-u(k), 0.0);
  }
  return ch;
}

ThrusterCommand merge_thruster(const Eigen::Matrix<double, 6, 1>& channels) {
  return {channels(0) - channels(1), channels(2) - channels(3), channels(4) - channels(5)};
}

BaseAccel base_dynamics(const BodyState& state,
                        const std::vector<Eigen::Vector3d>& contact_forces,
                        const std::vector<Eigen::Vector3d>& contact_points,
                        const ThrusterCommand& thrust,
                        const ExternalTorque& external_torque,
                        const RobotModel& model) {
  const Eigen::Matrix3d r = state.attitude.rotation();

  Eigen::Vector3d force_sum = Eigen::Vector3d::Zero();
  Eigen::Vector3d torque_inertial = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < contact_forces.size(); ++i) {
    force_sum += contact_forces[i];
    torque_inertial += (contact_points[i] - state.position).cross(contact_forces[i]);
  }

  BaseAccel acc;
  acc.linear = (force_sum + r * thrust) / model.total_mass;

  const Eigen::Vector3d torque_body = r.transpose() * torque_inertial + external_torque;
  const Eigen::Vector3d gyro = state.omega.cross(model.inertia * state.omega);
  acc.angular = model.inertia.ldlt().solve(torque_body - gyro);
  return acc;
}

namespace {

struct StateDerivative {
  Eigen::Vector3d d_position;
  Quaternion d_attitude;  // unnormalized 4-vector rate
  Eigen::Vector3d d_velocity;
  Eigen::Vector3d d_omega;
};

StateDerivative derivative(const BodyState& s, const BaseAccel& acc) {
  return {s.velocity, s.attitude.derivative(s.omega), acc.linear, acc.angular};
}

BodyState advance(const BodyState& s, const StateDerivative& d, double h) {
  BodyState out;
  out.position = s.position + h * d.d_position;
  out.velocity = s.velocity + h * d.d_velocity;
  out.omega = s.omega + h * d.d_omega;
  out.attitude.w = s.attitude.w + h * d.d_attitude.w;
  out.attitude.v = s.attitude.v + h * d.d_attitude.v;
  return out;
}

BodyState rk4_combine(const BodyState& s, const StateDerivative& k1, const StateDerivative& k2,
                      const StateDerivative& k3, const StateDerivative& k4, double dt) {
  BodyState out;
  const double h = dt / 6.0;
  out.position = s.position + h * (k1.d_position + 2 * k2.d_position + 2 * k3.d_position + k4.d_position);
  out.velocity = s.velocity + h * (k1.d_velocity + 2 * k2.d_velocity + 2 * k3.d_velocity + k4.d_velocity);
  out.omega = s.omega + h * (k1.d_omega + 2 * k2.d_omega + 2 * k3.d_omega + k4.d_omega);
  out.attitude.w = s.attitude.w + h * (k1.d_attitude.w + 2 * k2.d_attitude.w + 2 * k3.d_attitude.w + k4.d_attitude.w);
  out.attitude.v = s.attitude.v + h * (k1.d_attitude.v + 2 * k2.d_attitude.v + 2 * k3.d_attitude.v + k4.d_attitude.v);
  out.attitude = out.attitude.normalized();
  return out;
}

}  // namespace

BodyState integrate_state(const BodyState& state, const BaseAccel& acc, double dt) {
  const StateDerivative k1 = derivative(state, acc);
  const StateDerivative k2 = derivative(advance(state, k1, dt / 2), acc);
  const StateDerivative k3 = derivative(advance(state, k2, dt / 2), acc);
  const StateDerivative k4 = derivative(advance(state, k3, dt), acc);
  return rk4_combine(state, k1, k2, k3, k4, dt);
}

BodyState integrate_base_trajectory(BodyState state, double t0, double dt, int steps,
                                    const BaseForceSystem& system, const RobotModel& model,
                                    const std::function<void(double, const BodyState&)>& observer) {
  std::vector<Eigen::Vector3d> forces, points;
  auto eval = [&](double t, const BodyState& s) {
    forces.clear();
    points.clear();
    if (system.contacts) system.contacts(t, forces, points);
    const ThrusterCommand u = system.thrust ? system.thrust(t) : ThrusterCommand::Zero();
    const ExternalTorque te = system.external_torque ? system.external_torque(t) : ExternalTorque::Zero();
    return derivative(s, base_dynamics(s, forces, points, u, te, model));
  };

  if (observer) observer(t0, state);
  for (int k = 0; k < steps; ++k) {
    const double t = t0 + k * dt;
    const StateDerivative k1 = eval(t, state);
    const StateDerivative k2 = eval(t + dt / 2, advance(state, k1, dt / 2));
    const StateDerivative k3 = eval(t + dt / 2, advance(state, k2, dt / 2));
    const StateDerivative k4 = eval(t + dt, advance(state, k3, dt));
    state = rk4_combine(state, k1, k2, k3, k4, dt);
    if (observer) observer(t0 + (k + 1) * dt, state);
  }
  return state;
}

}  // namespace armada
