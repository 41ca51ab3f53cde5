#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Geometry>
#include <random>

#include "armada/arm_kinematics.hpp"
#include "armada/quaternion.hpp"
#include "armada/rigid_body.hpp"
#include "armada/robot_model.hpp"

using namespace armada;

namespace {

std::mt19937 rng(7);

Eigen::Vector3d random_vec(double scale = 1.0) {
  std::uniform_real_distribution<double> d(-scale, scale);
  return {d(rng), d(rng), d(rng)};
}

Quaternion random_quat() {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  return Quaternion(d(rng), {d(rng), d(rng), d(rng)}).normalized();
}

}  // namespace

TEST_CASE("axis-angle construction matches the reference rotation") {
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector3d axis = random_vec().normalized();
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    const double angle = d(rng);
    const Quaternion q = Quaternion::from_axis_angle(axis, angle);
    const Eigen::Matrix3d ref = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
    CHECK((q.rotation() - ref).norm() < 1e-12);
  }
}

TEST_CASE("rotation matrices are orthonormal with unit determinant") {
  for (int i = 0; i < 50; ++i) {
    const Eigen::Matrix3d R = random_quat().rotation();
    CHECK((R * R.transpose() - Eigen::Matrix3d::Identity()).norm() < 1e-12);
    CHECK(R.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("zyx euler angles round-trip through the quaternion") {
  std::uniform_real_distribution<double> d(-1.2, 1.2);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector3d rpy{d(rng), d(rng), d(rng)};
    const Quaternion q = Quaternion::from_euler_zyx(rpy);
    const Eigen::Matrix3d ref = (Eigen::AngleAxisd(rpy.z(), Eigen::Vector3d::UnitZ()) *
                                 Eigen::AngleAxisd(rpy.y(), Eigen::Vector3d::UnitY()) *
                                 Eigen::AngleAxisd(rpy.x(), Eigen::Vector3d::UnitX()))
                                    .toRotationMatrix();
    CHECK((q.rotation() - ref).norm() < 1e-12);
    CHECK((q.euler_zyx() - rpy).norm() < 1e-9);
  }
}

TEST_CASE("quaternion product matches the reference implementation") {
  for (int i = 0; i < 50; ++i) {
    const Quaternion a = random_quat(), b = random_quat();
    const Quaternion c = a * b;
    const Eigen::Quaterniond ea(a.w, a.v.x(), a.v.y(), a.v.z());
    const Eigen::Quaterniond eb(b.w, b.v.x(), b.v.y(), b.v.z());
    const Eigen::Quaterniond ec = ea * eb;
    CHECK(std::abs(c.w - ec.w()) < 1e-12);
    CHECK((c.v - ec.vec()).norm() < 1e-12);
  }
}

TEST_CASE("normalized fixes the double cover with non-negative scalar part") {
  const Quaternion q = Quaternion(-0.5, {0.5, 0.5, 0.5}).normalized();
  CHECK(q.w >= 0.0);
  CHECK(q.coeffs_wxyz().norm() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("quaternion derivative matches finite differences of the flow") {
  const double h = 1e-6;
  for (int i = 0; i < 20; ++i) {
    const Quaternion q = random_quat();
    const Eigen::Vector3d omega = random_vec(2.0);
    // Constant body-frame omega: q(t) = q * exp(t/2 (0, omega)).
    auto at = [&](double t) {
      return q * Quaternion::from_axis_angle(omega.normalized(), omega.norm() * t);
    };
    const Quaternion dq = q.derivative(omega);
    const Eigen::Vector4d fd = (at(h).coeffs_wxyz() - at(-h).coeffs_wxyz()) / (2.0 * h);
    CHECK((dq.coeffs_wxyz() - fd).norm() < 1e-9);
    // The rate is orthogonal to q as a 4-vector (unit-norm flow).
    CHECK(std::abs(dq.coeffs_wxyz().dot(q.coeffs_wxyz())) < 1e-12);
  }
}

TEST_CASE("geodesic angle matches the relative rotation and ignores the cover") {
  for (int i = 0; i < 50; ++i) {
    const Quaternion a = random_quat(), b = random_quat();
    const Eigen::AngleAxisd rel(a.rotation().transpose() * b.rotation());
    CHECK(std::abs(a.angle_to(b) - rel.angle()) < 1e-9);
    const Quaternion bneg(-b.w, -b.v);
    CHECK(std::abs(a.angle_to(bneg) - a.angle_to(b)) < 1e-12);
  }
}

TEST_CASE("skew matrix reproduces the cross product") {
  for (int i = 0; i < 20; ++i) {
    const Eigen::Vector3d a = random_vec(), b = random_vec();
    CHECK((skew(a) * b - a.cross(b)).norm() < 1e-15);
    CHECK((skew(a) + skew(a).transpose()).norm() == 0.0);
  }
}

TEST_CASE("thruster split produces non-negative channels and merges back") {
  for (int i = 0; i < 20; ++i) {
    const ThrusterCommand u = random_vec(30.0);
    const auto ch = split_thruster(u);
    CHECK(ch.minCoeff() >= 0.0);
    CHECK((merge_thruster(ch) - u).norm() < 1e-15);
  }
}

TEST_CASE("free base conserves momentum and a constant force integrates exactly") {
  const RobotModel model = load_robot_model("models/default_robot.json");
  BodyState s0;
  s0.position = random_vec(0.5);
  s0.attitude = random_quat();
  s0.velocity = random_vec(0.1);
  s0.omega = random_vec(0.2);

  BaseForceSystem sys;
  sys.contacts = [](double, std::vector<Eigen::Vector3d>&, std::vector<Eigen::Vector3d>&) {};
  sys.thrust = [](double) { return ThrusterCommand::Zero(); };
  sys.external_torque = [](double) { return ExternalTorque::Zero(); };

  SUBCASE("zero wrench keeps linear and angular momentum constant") {
    const Eigen::Vector3d L0 = s0.attitude.rotation() * (model.inertia * s0.omega);
    const BodyState sT = integrate_base_trajectory(s0, 0.0, 1e-3, 2000, sys, model);
    CHECK((sT.velocity - s0.velocity).norm() < 1e-12);
    const Eigen::Vector3d LT = sT.attitude.rotation() * (model.inertia * sT.omega);
    CHECK((LT - L0).norm() < 1e-6);  // torque-free precession, inertial frame
  }

  SUBCASE("constant inertial contact force at the base gives a parabola") {
    const Eigen::Vector3d f = random_vec(10.0);
    BodyState lin = s0;
    lin.omega.setZero();
    lin.attitude = Quaternion::identity();
    BaseForceSystem pushed = sys;
    pushed.contacts = [&](double, std::vector<Eigen::Vector3d>& forces,
                          std::vector<Eigen::Vector3d>& points) {
      forces.push_back(f);
      points.push_back(lin.position);  // through the center of mass: no torque
    };
    const double T = 2.0;
    const BodyState sT = integrate_base_trajectory(lin, 0.0, 1e-3, 2000, pushed, model);
    CHECK((sT.velocity - (lin.velocity + f * T / model.total_mass)).norm() < 1e-9);
    const Eigen::Vector3d expected =
        lin.position + lin.velocity * T + 0.5 * f / model.total_mass * T * T;
    CHECK((sT.position - expected).norm() < 1e-9);
  }

  SUBCASE("constant body rate integrates to the axis-angle attitude") {
    BodyState spin = s0;
    spin.omega = Eigen::Vector3d(0.0, 0.0, 0.4);  // principal axis: no precession
    const BodyState sT = integrate_base_trajectory(spin, 0.0, 1e-3, 2000, sys, model);
    const Quaternion expected =
        spin.attitude * Quaternion::from_axis_angle(Eigen::Vector3d::UnitZ(), 0.4 * 2.0);
    CHECK(sT.attitude.angle_to(expected) < 1e-9);
  }
}

TEST_CASE("thrust accelerates along the body axes without torque") {
  const RobotModel model = load_robot_model("models/default_robot.json");
  BodyState s;
  s.attitude = random_quat();
  const ThrusterCommand u{5.0, -3.0, 8.0};
  const BaseAccel acc = base_dynamics(s, {}, {}, u, ExternalTorque::Zero(), model);
  CHECK((acc.linear - s.attitude.rotation() * u / model.total_mass).norm() < 1e-12);
  CHECK(acc.angular.norm() < 1e-12);
}

TEST_CASE("contact torque enters through the lever arm about the base") {
  const RobotModel model = load_robot_model("models/default_robot.json");
  BodyState s;
  s.position = random_vec(0.3);
  s.attitude = random_quat();
  const Eigen::Vector3d f = random_vec(20.0), p = s.position + random_vec(0.8);
  const BaseAccel acc = base_dynamics(s, {f}, {p}, ThrusterCommand::Zero(),
                                      ExternalTorque::Zero(), model);
  const Eigen::Matrix3d R = s.attitude.rotation();
  const Eigen::Vector3d torque_body = R.transpose() * (p - s.position).cross(f);
  CHECK((model.inertia * acc.angular - torque_body).norm() < 1e-10);
  CHECK((acc.linear - f / model.total_mass).norm() < 1e-12);
}

TEST_CASE("tool jacobian matches central differences") {
  const RobotModel model = load_robot_model("models/default_robot.json");
  const ArmChain& chain = model.arms[0];
  std::uniform_real_distribution<double> d(-0.6, 0.6);
  const double h = 1e-6;
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd q(model.joints_per_arm());
    for (int i = 0; i < q.size(); ++i) q[i] = d(rng);
    const Eigen::MatrixXd jac = tool_jacobian(chain, q);
    for (int i = 0; i < q.size(); ++i) {
      Eigen::VectorXd qp = q, qm = q;
      qp[i] += h;
      qm[i] -= h;
      const Eigen::Vector3d fd = (tool_position(chain, qp) - tool_position(chain, qm)) / (2.0 * h);
      CHECK((jac.col(i) - fd).norm() < 1e-7);
    }
  }
}

TEST_CASE("world-frame kinematics compose the base pose with the body chain") {
  const RobotModel model = load_robot_model("models/default_robot.json");
  BodyState base;
  base.position = random_vec(0.5);
  base.attitude = random_quat();
  Eigen::VectorXd q = Eigen::VectorXd::Zero(model.joints_per_arm());
  std::uniform_real_distribution<double> d(-0.4, 0.4);
  for (int i = 0; i < q.size(); ++i) q[i] = d(rng);
  const Eigen::Matrix3d R = base.attitude.rotation();
  for (int a = 0; a < model.arm_count(); ++a) {
    const Pose world = forward_kinematics(model.arms[a], q, base);
    const Eigen::Vector3d body = tool_position(model.arms[a], q);
    CHECK((world.position - (R * body + base.position)).norm() < 1e-12);
  }
}

TEST_CASE("zero posture places every tool at its recorded nominal point") {
  const RobotModel model = load_robot_model("models/default_robot.json");
  const Eigen::VectorXd q0 = Eigen::VectorXd::Zero(model.joints_per_arm());
  for (int a = 0; a < model.arm_count(); ++a)
    CHECK((tool_position(model.arms[a], q0) - model.nominal_tool[a]).norm() < 1e-9);
}

TEST_CASE("damped least squares solves a well-conditioned task") {
  const RobotModel model = load_robot_model("models/default_robot.json");
  Eigen::VectorXd q(model.joints_per_arm());
  q << 0.3, -0.2, 0.4, 0.1, -0.3, 0.2;
  const Eigen::MatrixXd jac = tool_jacobian(model.arms[0], q);
  const Eigen::Vector3d v = random_vec(0.1);
  const Eigen::VectorXd dq = damped_least_squares(jac, v, 1e-4);
  CHECK((jac * dq - v).norm() < 1e-3);
}
