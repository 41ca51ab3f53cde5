#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace armada {

/// Unit quaternion, scalar-first storage (w, x, y, z).
///
/// Convention: q represents the attitude of the body relative to the inertial
/// frame, i.e. rotation() maps body-frame vectors into the inertial frame.
/// The double cover is fixed by normalized(): the scalar part is kept >= 0.
/// Body-frame angular velocity drives the kinematics q_dot = 1/2 q * (0, w).
struct Quaternion {
  double w = 1.0;
  Eigen::Vector3d v = Eigen::Vector3d::Zero();

  Quaternion() = default;
  Quaternion(double w_, double x, double y, double z) : w(w_), v(x, y, z) {}
  Quaternion(double w_, const Eigen::Vector3d& v_) : w(w_), v(v_) {}

  static Quaternion identity() { return {}; }
  static Quaternion from_axis_angle(const Eigen::Vector3d& axis, double angle);
  /// ZYX convention: yaw about z, then pitch about y, then roll about x.
  static Quaternion from_euler_zyx(const Eigen::Vector3d& rpy);

  double norm() const;
  /// Unit norm, scalar part >= 0.
  Quaternion normalized() const;
  Quaternion conjugate() const { return {w, -v}; }
  Quaternion operator*(const Quaternion& o) const;

  /// Body->inertial rotation matrix.
  Eigen::Matrix3d rotation() const;
  Eigen::Vector3d rotate(const Eigen::Vector3d& p) const { return rotation() * p; }

  /// ZYX Euler angles (roll, pitch, yaw) recovering this attitude.
  Eigen::Vector3d euler_zyx() const;

  /// Quaternion rate under body-frame angular velocity: 1/2 q * (0, omega).
  /// Returned as (w_dot, v_dot); orthogonal to q as a 4-vector.
  Quaternion derivative(const Eigen::Vector3d& omega_body) const;

  /// Geodesic angle to another attitude, in [0, pi].
  double angle_to(const Quaternion& o) const;

  Eigen::Vector4d coeffs_wxyz() const { return {w, v.x(), v.y(), v.z()}; }
};

inline Eigen::Matrix3d skew(const Eigen::Vector3d& a) {
  Eigen::Matrix3d s;
  s << 0, -a.z(), a.y(), a.z(), 0, -a.x(), -a.y(), a.x(), 0;
  return s;
}

}  // namespace armada
