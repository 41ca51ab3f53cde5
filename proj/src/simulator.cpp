#include "armada/simulator.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Geometry>
#include <cmath>
#include <stdexcept>

namespace armada {
namespace {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

// Motion-vector coordinate transform for a child frame at r with orientation
// E^T in the parent: v_child = X v_parent, v = [omega; v_origin].
Matrix6d motion_transform(const Eigen::Matrix3d& E, const Eigen::Vector3d& r) {
  Matrix6d X = Matrix6d::Zero();
  X.topLeftCorner<3, 3>() = E;
  X.bottomLeftCorner<3, 3>() = -E * skew(r);
  X.bottomRightCorner<3, 3>() = E;
  return X;
}

// Spatial cross products: crm for motion vectors, crf = -crm^T for forces.
Matrix6d crm(const Vector6d& v) {
  Matrix6d m = Matrix6d::Zero();
  m.topLeftCorner<3, 3>() = skew(v.head<3>());
  m.bottomLeftCorner<3, 3>() = skew(v.tail<3>());
  m.bottomRightCorner<3, 3>() = skew(v.head<3>());
  return m;
}

Matrix6d crf(const Vector6d& v) { return -crm(v).transpose(); }

// Spatial inertia about the frame origin for mass m, COM c and COM-frame
// rotational inertia Ic, all in the same frame.
Matrix6d spatial_inertia(double m, const Eigen::Vector3d& c, const Eigen::Matrix3d& Ic) {
  const Eigen::Matrix3d cx = skew(c);
  Matrix6d I;
  I.topLeftCorner<3, 3>() = Ic + m * cx * cx.transpose();
  I.topRightCorner<3, 3>() = m * cx;
  I.bottomLeftCorner<3, 3>() = m * cx.transpose();
  I.bottomRightCorner<3, 3>() = m * Eigen::Matrix3d::Identity();
  return I;
}

Eigen::Matrix3d rpy_matrix(const Eigen::Vector3d& rpy) {
  return Quaternion::from_euler_zyx(rpy).rotation();
}

}  // namespace

Simulator::Simulator(RobotModel model, SimOptions opt) : model_(std::move(model)), opt_(opt) {
  const int zeta = model_.arm_count();
  joints_per_arm_ = model_.joints_per_arm();
  nj_ = zeta * joints_per_arm_;
  anchors_.assign(zeta, std::nullopt);

  bodies_.resize(1 + nj_);

  // Base body: the central box plus the non-moving arm pedestals, lumped.
  {
    const double mb = model_.body_mass;
    const Eigen::Vector3d h = model_.body_half_extents;
    Eigen::Matrix3d box = Eigen::Matrix3d::Zero();
    box(0, 0) = mb / 3.0 * (h.y() * h.y() + h.z() * h.z());
    box(1, 1) = mb / 3.0 * (h.x() * h.x() + h.z() * h.z());
    box(2, 2) = mb / 3.0 * (h.x() * h.x() + h.y() * h.y());
    Matrix6d I = spatial_inertia(mb, Eigen::Vector3d::Zero(), box);
    for (const ArmChain& arm : model_.arms) {
      I += spatial_inertia(model_.arm_base_mass, arm.mount, model_.arm_base_inertia.asDiagonal());
    }
    bodies_[0].parent = -1;
    bodies_[0].R_fixed.setIdentity();
    bodies_[0].r_fixed.setZero();
    bodies_[0].axis.setZero();
    bodies_[0].inertia = I;
  }

  for (int a = 0; a < zeta; ++a) {
    const ArmChain& chain = model_.arms[a];
    const Eigen::Matrix3d R_mount =
        Eigen::AngleAxisd(chain.mount_yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    for (int j = 0; j < joints_per_arm_; ++j) {
      LinkBody& b = bodies_[1 + a * joints_per_arm_ + j];
      const JointParams& jp = chain.joints[j];
      if (j == 0) {
        b.parent = 0;
        b.R_fixed = R_mount * rpy_matrix(jp.fixed_rpy);
        b.r_fixed = chain.mount + R_mount * jp.translation;
      } else {
        b.parent = a * joints_per_arm_ + j;  // previous body index
        b.R_fixed = rpy_matrix(jp.fixed_rpy);
        b.r_fixed = jp.translation;
      }
      b.axis = jp.axis.normalized();
      // Link COM sits halfway to the next joint (tool point for the last link).
      const Eigen::Vector3d next =
          (j + 1 < joints_per_arm_) ? chain.joints[j + 1].translation : chain.tool_offset;
      const LinkParams& lp = chain.links[j];
      b.inertia = spatial_inertia(lp.mass, 0.5 * next, lp.inertia.asDiagonal());
    }
  }

  state_.base = BodyState{};
  state_.q = Eigen::VectorXd::Zero(nj_);
  state_.dq = Eigen::VectorXd::Zero(nj_);
}

void Simulator::reset(const BodyState& base, const Eigen::VectorXd& q, const Eigen::VectorXd& dq) {
  if (q.size() != nj_ || dq.size() != nj_) throw std::invalid_argument("joint vector size mismatch");
  state_.base = base;
  state_.base.attitude = state_.base.attitude.normalized();
  state_.q = q;
  state_.dq = dq;
  std::fill(anchors_.begin(), anchors_.end(), std::nullopt);
}

void Simulator::dock(int arm, const Eigen::Vector3d& world_anchor) { anchors_.at(arm) = world_anchor; }
void Simulator::release(int arm) { anchors_.at(arm) = std::nullopt; }

void Simulator::kinematics(const SimState& s, Kin& k) const {
  const int nb = static_cast<int>(bodies_.size());
  k.Xup.resize(nb);
  k.Rw.resize(nb);
  k.ow.resize(nb);
  k.v.resize(nb);

  const Eigen::Matrix3d R = s.base.attitude.rotation();
  k.Xup[0] = motion_transform(R.transpose(), s.base.position);  // world -> base coords
  k.Rw[0] = R;
  k.ow[0] = s.base.position;
  k.v[0].head<3>() = s.base.omega;
  k.v[0].tail<3>() = R.transpose() * s.base.velocity;

  k.vfull.resize(6 + nj_);
  k.vfull.head<6>() = k.v[0];
  k.vfull.tail(nj_) = s.dq;

  for (int i = 1; i < nb; ++i) {
    const LinkBody& b = bodies_[i];
    const int dof = i - 1;  // joint index within q
    const Eigen::Matrix3d R_joint =
        Eigen::AngleAxisd(s.q[dof], b.axis).toRotationMatrix();
    const Eigen::Matrix3d R_local = b.R_fixed * R_joint;
    k.Xup[i] = motion_transform(R_local.transpose(), b.r_fixed);
    k.Rw[i] = k.Rw[b.parent] * R_local;
    k.ow[i] = k.ow[b.parent] + k.Rw[b.parent] * b.r_fixed;
    Vector6d vj = Vector6d::Zero();
    vj.head<3>() = b.axis * s.dq[dof];
    k.v[i] = k.Xup[i] * k.v[b.parent] + vj;
  }
}

Eigen::MatrixXd Simulator::crba(const Kin& k) const {
  const int nb = static_cast<int>(bodies_.size());
  const int n = 6 + nj_;
  std::vector<Matrix6d> Ic(nb);
  for (int i = 0; i < nb; ++i) Ic[i] = bodies_[i].inertia;
  for (int i = nb - 1; i >= 1; --i) {
    Ic[bodies_[i].parent] += k.Xup[i].transpose() * Ic[i] * k.Xup[i];
  }

  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
  H.topLeftCorner<6, 6>() = Ic[0];
  for (int i = 1; i < nb; ++i) {
    const int di = 5 + i;  // body i -> column of its joint
    Vector6d S = Vector6d::Zero();
    S.head<3>() = bodies_[i].axis;
    Vector6d F = Ic[i] * S;
    H(di, di) = S.dot(F);
    int j = i;
    while (bodies_[j].parent > 0) {
      F = k.Xup[j].transpose() * F;
      j = bodies_[j].parent;
      H(5 + j, di) = bodies_[j].axis.dot(F.head<3>());
      H(di, 5 + j) = H(5 + j, di);
    }
    F = k.Xup[j].transpose() * F;  // into base coordinates
    H.block<6, 1>(0, di) = F;
    H.block<1, 6>(di, 0) = F.transpose();
  }
  return H;
}

Eigen::VectorXd Simulator::bias(const Kin& k, std::vector<Vector6d>* abias) const {
  const int nb = static_cast<int>(bodies_.size());
  std::vector<Vector6d> a(nb), f(nb);
  a[0].setZero();  // no gravity; base acceleration enters through the KKT solve
  f[0] = crf(k.v[0]) * (bodies_[0].inertia * k.v[0]);
  for (int i = 1; i < nb; ++i) {
    Vector6d vj = Vector6d::Zero();
    vj.head<3>() = bodies_[i].axis * k.vfull[5 + i];
    a[i] = k.Xup[i] * a[bodies_[i].parent] + crm(k.v[i]) * vj;
    f[i] = bodies_[i].inertia * a[i] + crf(k.v[i]) * (bodies_[i].inertia * k.v[i]);
  }
  Eigen::VectorXd C(6 + nj_);
  for (int i = nb - 1; i >= 1; --i) {
    C[5 + i] = bodies_[i].axis.dot(f[i].head<3>());
    f[bodies_[i].parent] += k.Xup[i].transpose() * f[i];
  }
  C.head<6>() = f[0];
  if (abias) *abias = std::move(a);
  return C;
}

Eigen::VectorXd Simulator::accelerations(const SimState& s, const Eigen::VectorXd& tau,
                                         const Eigen::Vector3d& thrust,
                                         const Eigen::Vector3d& external_torque) const {
  Kin k;
  kinematics(s, k);
  const Eigen::MatrixXd H = crba(k);
  std::vector<Vector6d> abias;
  const Eigen::VectorXd C = bias(k, &abias);

  const int n = 6 + nj_;
  Eigen::VectorXd rhs(n);
  // Thrust acts through the base-body COM: torque about the base origin is
  // c0 x u. The base COM offset comes from the lumped spatial inertia.
  const Eigen::Vector3d h0 =
      Eigen::Vector3d(bodies_[0].inertia(2, 4), bodies_[0].inertia(0, 5), bodies_[0].inertia(1, 3));
  const double m0 = bodies_[0].inertia(5, 5);
  const Eigen::Vector3d c0 = h0 / m0;
  rhs.head<3>() = c0.cross(thrust) + external_torque;
  rhs.segment<3>(3) = thrust;
  rhs.tail(nj_) = tau;
  rhs -= C;

  std::vector<int> docked_arms;
  for (int a = 0; a < model_.arm_count(); ++a)
    if (anchors_[a]) docked_arms.push_back(a);

  Eigen::LDLT<Eigen::MatrixXd> Hf(H);
  if (docked_arms.empty()) return Hf.solve(rhs);

  const int m = 3 * static_cast<int>(docked_arms.size());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, n);
  Eigen::VectorXd b(m);
  const double sg = opt_.baumgarte;
  for (size_t di = 0; di < docked_arms.size(); ++di) {
    const int a = docked_arms[di];
    const int last = 1 + a * joints_per_arm_ + joints_per_arm_ - 1;
    const Eigen::Vector3d r_tool = model_.arms[a].tool_offset;
    const Eigen::Vector3d pt = k.ow[last] + k.Rw[last] * r_tool;
    const int row = 3 * static_cast<int>(di);

    J.block<3, 3>(row, 0) = -skew(pt - s.base.position) * k.Rw[0];
    J.block<3, 3>(row, 3) = k.Rw[0];
    for (int j = 0; j < joints_per_arm_; ++j) {
      const int bj = 1 + a * joints_per_arm_ + j;
      const Eigen::Vector3d z = k.Rw[bj] * bodies_[bj].axis;
      J.block<3, 1>(row, 6 + a * joints_per_arm_ + j) = z.cross(pt - k.ow[bj]);
    }

    // Velocity-product acceleration of the tool point (joint accelerations
    // zero), classical, world frame.
    const Eigen::Vector3d w = k.v[last].head<3>();
    const Eigen::Vector3d vo = k.v[last].tail<3>();
    const Eigen::Vector3d beta =
        k.Rw[last] * (abias[last].tail<3>() + abias[last].head<3>().cross(r_tool) +
                      w.cross(vo + w.cross(r_tool)));
    const Eigen::Vector3d verr = J.middleRows<3>(row) * k.vfull;
    b.segment<3>(row) = -2.0 * sg * verr - sg * sg * (pt - *anchors_[a]) - beta;
  }

  // Schur complement: H qdd = rhs + J^T lambda, J qdd = b.
  const Eigen::MatrixXd HiJt = Hf.solve(J.transpose());
  Eigen::MatrixXd A = J * HiJt;
  A.diagonal().array() += 1e-12;
  const Eigen::VectorXd lambda = A.ldlt().solve(b - J * Hf.solve(rhs));
  return Hf.solve(rhs + J.transpose() * lambda);
}

namespace {

struct SimDeriv {
  Eigen::Vector3d dpos, dvel, domega;
  Quaternion datt;
  Eigen::VectorXd dq, ddq;
};

SimState advance(const SimState& s, const SimDeriv& d, double h) {
  SimState out = s;
  out.base.position += h * d.dpos;
  out.base.velocity += h * d.dvel;
  out.base.attitude.w += h * d.datt.w;
  out.base.attitude.v += h * d.datt.v;
  out.base.omega += h * d.domega;
  out.q += h * d.dq;
  out.dq += h * d.ddq;
  return out;
}

}  // namespace

void Simulator::step(const Eigen::VectorXd& tau, const Eigen::Vector3d& thrust,
                     const Eigen::Vector3d& external_torque, double dt) {
  if (tau.size() != nj_) throw std::invalid_argument("torque vector size mismatch");
  if (!(dt > 0.0)) return;
  const int substeps = std::max(1, static_cast<int>(std::ceil(dt / opt_.max_dt - 1e-12)));
  const double h = dt / substeps;

  auto deriv = [&](const SimState& s) {
    SimDeriv d;
    const Eigen::VectorXd qdd = accelerations(s, tau, thrust, external_torque);
    const Eigen::Matrix3d R = s.base.attitude.rotation();
    const Eigen::Vector3d v_body = R.transpose() * s.base.velocity;
    d.dpos = s.base.velocity;
    // qdd linear block is the apparent derivative of the body-frame velocity.
    d.dvel = R * (qdd.segment<3>(3) + s.base.omega.cross(v_body));
    d.domega = qdd.head<3>();
    d.datt = s.base.attitude.derivative(s.base.omega);
    d.dq = s.dq;
    d.ddq = qdd.tail(nj_);
    return d;
  };

  for (int step = 0; step < substeps; ++step) {
    const SimDeriv k1 = deriv(state_);
    const SimDeriv k2 = deriv(advance(state_, k1, 0.5 * h));
    const SimDeriv k3 = deriv(advance(state_, k2, 0.5 * h));
    const SimDeriv k4 = deriv(advance(state_, k3, h));
    SimDeriv sum = k1;
    sum.dpos += 2.0 * k2.dpos + 2.0 * k3.dpos + k4.dpos;
    sum.dvel += 2.0 * k2.dvel + 2.0 * k3.dvel + k4.dvel;
    sum.domega += 2.0 * k2.domega + 2.0 * k3.domega + k4.domega;
    sum.datt.w += 2.0 * k2.datt.w + 2.0 * k3.datt.w + k4.datt.w;
    sum.datt.v += 2.0 * k2.datt.v + 2.0 * k3.datt.v + k4.datt.v;
    sum.dq += 2.0 * k2.dq + 2.0 * k3.dq + k4.dq;
    sum.ddq += 2.0 * k2.ddq + 2.0 * k3.ddq + k4.ddq;
    state_ = advance(state_, sum, h / 6.0);
    state_.base.attitude = state_.base.attitude.normalized();
  }
}

Eigen::Vector3d Simulator::tool_position(int arm) const {
  Eigen::VectorXd qa = state_.q.segment(arm_offset(arm), joints_per_arm_);
  return forward_kinematics(model_.arms[arm], qa, state_.base).position;
}

Eigen::Vector3d Simulator::tool_velocity(int arm) const {
  Eigen::VectorXd qa = state_.q.segment(arm_offset(arm), joints_per_arm_);
  Eigen::VectorXd dqa = state_.dq.segment(arm_offset(arm), joints_per_arm_);
  const Eigen::Matrix3d R = state_.base.attitude.rotation();
  const Eigen::Vector3d p_body = armada::tool_position(model_.arms[arm], qa);
  const Eigen::Vector3d omega_w = R * state_.base.omega;
  return state_.base.velocity + omega_w.cross(R * p_body) +
         R * (tool_jacobian(model_.arms[arm], qa) * dqa);
}

Eigen::MatrixXd Simulator::tool_jacobian_world(int arm) const {
  Eigen::VectorXd qa = state_.q.segment(arm_offset(arm), joints_per_arm_);
  return state_.base.attitude.rotation() * tool_jacobian(model_.arms[arm], qa);
}

Eigen::Vector3d Simulator::linear_momentum() const {
  Kin k;
  kinematics(state_, k);
  Eigen::Vector3d P = Eigen::Vector3d::Zero();
  for (size_t i = 0; i < bodies_.size(); ++i) {
    const Vector6d h = bodies_[i].inertia * k.v[i];
    P += k.Rw[i] * h.tail<3>();
  }
  return P;
}

Eigen::Vector3d Simulator::angular_momentum() const {
  Kin k;
  kinematics(state_, k);
  Eigen::Vector3d L = Eigen::Vector3d::Zero();
  for (size_t i = 0; i < bodies_.size(); ++i) {
    const Vector6d h = bodies_[i].inertia * k.v[i];
    L += k.Rw[i] * h.head<3>() + k.ow[i].cross(Eigen::Vector3d(k.Rw[i] * h.tail<3>()));
  }
  return L;
}

double Simulator::kinetic_energy() const {
  Kin k;
  kinematics(state_, k);
  double e = 0.0;
  for (size_t i = 0; i < bodies_.size(); ++i) {
    e += 0.5 * k.v[i].dot(bodies_[i].inertia * k.v[i]);
  }
  return e;
}

Eigen::Vector3d Simulator::center_of_mass() const {
  Kin k;
  kinematics(state_, k);
  Eigen::Vector3d num = Eigen::Vector3d::Zero();
  double mass = 0.0;
  for (size_t i = 0; i < bodies_.size(); ++i) {
    const double m = bodies_[i].inertia(5, 5);
    const Eigen::Vector3d h(bodies_[i].inertia(2, 4), bodies_[i].inertia(0, 5),
                            bodies_[i].inertia(1, 3));
    num += m * k.ow[i] + k.Rw[i] * h;
    mass += m;
  }
  return num / mass;
}

Eigen::MatrixXd Simulator::mass_matrix() const {
  Kin k;
  kinematics(state_, k);
  return crba(k);
}

Eigen::VectorXd Simulator::bias_vector() const {
  Kin k;
  kinematics(state_, k);
  return bias(k, nullptr);
}

}  // namespace armada
