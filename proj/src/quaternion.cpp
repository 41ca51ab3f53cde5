#include "armada/quaternion.hpp"

#include <cmath>

namespace armada {

Quaternion Quaternion::from_axis_angle(const Eigen::Vector3d& axis, double angle) {
  const double n = axis.norm();
  if (n < 1e-300) return identity();
  const double half = 0.5 * angle;
  return Quaternion(std::cos(half), std::sin(half) * (axis / n)).normalized();
}

Quaternion Quaternion::from_euler_zyx(const Eigen::Vector3d& rpy) {
  const Quaternion qz = from_axis_angle(Eigen::Vector3d::UnitZ(), rpy.z());
  const Quaternion qy = from_axis_angle(Eigen::Vector3d::UnitY(), rpy.y());
  const Quaternion qx = from_axis_angle(Eigen::Vector3d::UnitX(), rpy.x());
  return (qz * qy * qx).normalized();
}

double Quaternion::norm() const { return std::sqrt(w * w + v.squaredNorm()); }

Quaternion Quaternion::normalized() const {
  const double n = norm();
  Quaternion q{w / n, v / n};
  if (q.w < 0.0) {
    q.w = -q.w;
    q.v = -q.v;
  }
  return q;
}

Quaternion Quaternion::operator*(const Quaternion& o) const {
  return {w * o.w - v.dot(o.v), w * o.v + o.w * v + v.cross(o.v)};
}

Eigen::Matrix3d Quaternion::rotation() const {
  // R = (w^2 - v.v) E + 2 v v^T + 2 w [v]x  (body -> inertial)
  Eigen::Matrix3d r = (w * w - v.squaredNorm()) * Eigen::Matrix3d::Identity();
  r += 2.0 * (v * v.transpose());
  r += 2.0 * w * skew(v);
  return r;
}

Eigen::Vector3d Quaternion::euler_zyx() const {
  const Eigen::Matrix3d r = rotation();
  const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  double roll, yaw;
  if (std::abs(r(2, 0)) < 1.0 - 1e-12) {
    roll = std::atan2(r(2, 1), r(2, 2));
    yaw = std::atan2(r(1, 0), r(0, 0));
  } else {
    // gimbal lock: fold everything into roll
    roll = std::atan2(-r(1, 2), r(1, 1));
    yaw = 0.0;
  }
  return {roll, pitch, yaw};
}

Quaternion Quaternion::derivative(const Eigen::Vector3d& omega_body) const {
  return {-0.5 * v.dot(omega_body), 0.5 * (w * omega_body + v.cross(omega_body))};
}

double Quaternion::angle_to(const Quaternion& o) const {
  const Quaternion d = conjugate() * o;
  const double c = std::clamp(std::abs(d.w) / d.norm(), 0.0, 1.0);
  return 2.0 * std::acos(c);
}

}  // namespace armada
