#pragma once

#include <array>
#include <cmath>

namespace armada {

// Minimal fixed-size vector/matrix helpers templated on the scalar type, so
// the same expressions evaluate on double and on forward-mode AD scalars.

template <class T>
using Vec3T = std::array<T, 3>;

template <class T>
using Mat3T = std::array<T, 9>;  // row-major

template <class T>
Vec3T<T> vec3(const T& x, const T& y, const T& z) {
  return {x, y, z};
}

template <class T>
Vec3T<T> operator+(const Vec3T<T>& a, const Vec3T<T>& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

template <class T>
Vec3T<T> operator-(const Vec3T<T>& a, const Vec3T<T>& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

template <class T>
Vec3T<T> operator*(const T& s, const Vec3T<T>& a) {
  return {s * a[0], s * a[1], s * a[2]};
}

template <class T>
T dot(const Vec3T<T>& a, const Vec3T<T>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

template <class T>
Vec3T<T> cross(const Vec3T<T>& a, const Vec3T<T>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

template <class T>
Vec3T<T> mat_vec(const Mat3T<T>& m, const Vec3T<T>& v) {
  return {m[0] * v[0] + m[1] * v[1] + m[2] * v[2],
          m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
          m[6] * v[0] + m[7] * v[1] + m[8] * v[2]};
}

/// m^T v; applies the inverse of a rotation without forming it.
template <class T>
Vec3T<T> mat_tvec(const Mat3T<T>& m, const Vec3T<T>& v) {
  return {m[0] * v[0] + m[3] * v[1] + m[6] * v[2],
          m[1] * v[0] + m[4] * v[1] + m[7] * v[2],
          m[2] * v[0] + m[5] * v[1] + m[8] * v[2]};
}

/// Body-to-inertial rotation for ZYX Euler angles (roll, pitch, yaw):
/// R = Rz(yaw) Ry(pitch) Rx(roll).
template <class T>
Mat3T<T> rotation_zyx(const T& roll, const T& pitch, const T& yaw) {
  using std::cos;
  using std::sin;
  const T cr = cos(roll), sr = sin(roll);
  const T cp = cos(pitch), sp = sin(pitch);
  const T cy = cos(yaw), sy = sin(yaw);
  return {cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
          sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
          T(0.0) - sp, cp * sr, cp * cr};
}

/// Body angular velocity from ZYX Euler angles and their time derivatives.
/// omega = W(roll, pitch) * rpy_dot with
///   W = [1    0       -sin(pitch)          ]
///       [0  cos(roll)  cos(pitch) sin(roll)]
///       [0 -sin(roll)  cos(pitch) cos(roll)]
template <class T>
Vec3T<T> body_rates_zyx(const Vec3T<T>& rpy, const Vec3T<T>& rpy_dot) {
  using std::cos;
  using std::sin;
  const T cr = cos(rpy[0]), sr = sin(rpy[0]);
  const T cp = cos(rpy[1]), sp = sin(rpy[1]);
  return {rpy_dot[0] - sp * rpy_dot[2],
          cr * rpy_dot[1] + cp * sr * rpy_dot[2],
          (T(0.0) - sr) * rpy_dot[1] + cp * cr * rpy_dot[2]};
}

/// Body angular acceleration: omega_dot = W_dot * rpy_dot + W * rpy_ddot.
template <class T>
Vec3T<T> body_accel_zyx(const Vec3T<T>& rpy, const Vec3T<T>& rpy_dot, const Vec3T<T>& rpy_ddot) {
  using std::cos;
  using std::sin;
  const T cr = cos(rpy[0]), sr = sin(rpy[0]);
  const T cp = cos(rpy[1]), sp = sin(rpy[1]);
  const T rd = rpy_dot[0], pd = rpy_dot[1], yd = rpy_dot[2];
  Vec3T<T> wd = {(T(0.0) - cp * pd) * yd,
                 (T(0.0) - sr * rd) * pd + (cp * cr * rd - sp * sr * pd) * yd,
                 (T(0.0) - cr * rd) * pd + ((T(0.0) - cp * sr) * rd - sp * cr * pd) * yd};
  return wd + body_rates_zyx(rpy, rpy_ddot);
}

}  // namespace armada
