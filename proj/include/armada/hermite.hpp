#pragma once

#include <array>

namespace armada {

/// Cubic coefficients (a0, a1, a2, a3) for p(s) = a0 + a1 s + a2 s^2 + a3 s^3
/// on s in [0, T], satisfying the endpoint conditions
///   p(0) = u0, p'(0) = du0, p(T) = u1, p'(T) = du1.
/// Templated so dual-number scalars flow through unchanged.
template <class S>
std::array<S, 4> hermite_coefficients(const S& u0, const S& du0, const S& u1, const S& du1,
                                      const S& T) {
  const S inv = S(1.0) / T;
  const S inv2 = inv * inv;
  const S a2 = (S(3.0) * (u1 - u0) - T * (S(2.0) * du0 + du1)) * inv2;
  const S a3 = (S(2.0) * (u0 - u1) + T * (du0 + du1)) * inv2 * inv;
  return {u0, du0, a2, a3};
}

template <class S>
S hermite_value(const std::array<S, 4>& a, const S& s) {
  return a[0] + s * (a[1] + s * (a[2] + s * a[3]));
}

template <class S>
S hermite_rate(const std::array<S, 4>& a, const S& s) {
  return a[1] + s * (S(2.0) * a[2] + s * (S(3.0) * a[3]));
}

template <class S>
S hermite_accel(const std::array<S, 4>& a, const S& s) {
  return S(2.0) * a[2] + S(6.0) * a[3] * s;
}

/// Direct endpoint-interpolated evaluation, avoiding the coefficient form.
template <class S>
S hermite_eval(const S& u0, const S& du0, const S& u1, const S& du1, const S& T, const S& s) {
  return hermite_value(hermite_coefficients(u0, du0, u1, du1, T), s);
}

}  // namespace armada
