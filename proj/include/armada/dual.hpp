#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace armada {

/// Forward-mode dual number with K simultaneous derivative slots.
///
/// The transcription is evaluated once per "color chunk": each slot carries
/// d/d(one column group) so a full sparse Jacobian costs ceil(colors / K)
/// sweeps. Plain arithmetic only; no allocation.
template <int K>
struct Dual {
  double v = 0.0;
  std::array<double, K> d{};

  Dual() = default;
  explicit Dual(double value) : v(value) { d.fill(0.0); }

  double value() const { return v; }

  Dual operator-() const {
    Dual r;
    r.v = -v;
    for (int k = 0; k < K; ++k) r.d[k] = -d[k];
    return r;
  }

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (int k = 0; k < K; ++k) d[k] += o.d[k];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (int k = 0; k < K; ++k) d[k] -= o.d[k];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    for (int k = 0; k < K; ++k) d[k] = d[k] * o.v + v * o.d[k];
    v *= o.v;
    return *this;
  }

  friend Dual operator+(Dual a, const Dual& b) { return a += b; }
  friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
  friend Dual operator*(Dual a, const Dual& b) { return a *= b; }
  friend Dual operator/(const Dual& a, const Dual& b) {
    Dual r;
    const double inv = 1.0 / b.v;
    r.v = a.v * inv;
    for (int k = 0; k < K; ++k) r.d[k] = (a.d[k] - r.v * b.d[k]) * inv;
    return r;
  }

  friend bool operator<(const Dual& a, const Dual& b) { return a.v < b.v; }
  friend bool operator>(const Dual& a, const Dual& b) { return a.v > b.v; }
  friend bool operator<=(const Dual& a, const Dual& b) { return a.v <= b.v; }
  friend bool operator>=(const Dual& a, const Dual& b) { return a.v >= b.v; }
};

template <int K>
Dual<K> sin(const Dual<K>& a) {
  Dual<K> r;
  r.v = std::sin(a.v);
  const double c = std::cos(a.v);
  for (int k = 0; k < K; ++k) r.d[k] = c * a.d[k];
  return r;
}

template <int K>
Dual<K> cos(const Dual<K>& a) {
  Dual<K> r;
  r.v = std::cos(a.v);
  const double s = -std::sin(a.v);
  for (int k = 0; k < K; ++k) r.d[k] = s * a.d[k];
  return r;
}

template <int K>
Dual<K> exp(const Dual<K>& a) {
  Dual<K> r;
  r.v = std::exp(a.v);
  for (int k = 0; k < K; ++k) r.d[k] = r.v * a.d[k];
  return r;
}

template <int K>
Dual<K> log(const Dual<K>& a) {
  Dual<K> r;
  r.v = std::log(a.v);
  const double inv = 1.0 / a.v;
  for (int k = 0; k < K; ++k) r.d[k] = inv * a.d[k];
  return r;
}

template <int K>
Dual<K> sqrt(const Dual<K>& a) {
  Dual<K> r;
  r.v = std::sqrt(a.v);
  const double g = 0.5 / r.v;
  for (int k = 0; k < K; ++k) r.d[k] = g * a.d[k];
  return r;
}

template <int K>
Dual<K> tanh(const Dual<K>& a) {
  Dual<K> r;
  r.v = std::tanh(a.v);
  const double g = 1.0 - r.v * r.v;
  for (int k = 0; k < K; ++k) r.d[k] = g * a.d[k];
  return r;
}

/// Column-dependency tracker: evaluating the transcription with Track scalars
/// yields, per emitted row, the exact set of decision indices it can depend
/// on. Used once to build the Jacobian sparsity pattern and its coloring.
struct Track {
  double v = 0.0;
  std::vector<std::int32_t> deps;  // sorted, unique

  Track() = default;
  explicit Track(double value) : v(value) {}

  double value() const { return v; }

  static std::vector<std::int32_t> merge(const std::vector<std::int32_t>& a,
                                         const std::vector<std::int32_t>& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    std::vector<std::int32_t> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
  }

  Track operator-() const {
    Track r = *this;
    r.v = -r.v;
    return r;
  }
  Track& operator+=(const Track& o) {
    v += o.v;
    deps = merge(deps, o.deps);
    return *this;
  }
  Track& operator-=(const Track& o) {
    v -= o.v;
    deps = merge(deps, o.deps);
    return *this;
  }
  Track& operator*=(const Track& o) {
    v *= o.v;
    deps = merge(deps, o.deps);
    return *this;
  }
  friend Track operator+(Track a, const Track& b) { return a += b; }
  friend Track operator-(Track a, const Track& b) { return a -= b; }
  friend Track operator*(Track a, const Track& b) { return a *= b; }
  friend Track operator/(Track a, const Track& b) {
    a.v /= b.v;
    a.deps = Track::merge(a.deps, b.deps);
    return a;
  }
  friend bool operator<(const Track& a, const Track& b) { return a.v < b.v; }
  friend bool operator>(const Track& a, const Track& b) { return a.v > b.v; }
  friend bool operator<=(const Track& a, const Track& b) { return a.v <= b.v; }
  friend bool operator>=(const Track& a, const Track& b) { return a.v >= b.v; }
};

inline Track sin(Track a) { a.v = std::sin(a.v); return a; }
inline Track cos(Track a) { a.v = std::cos(a.v); return a; }
inline Track exp(Track a) { a.v = std::exp(a.v); return a; }
inline Track log(Track a) { a.v = std::log(a.v); return a; }
inline Track sqrt(Track a) { a.v = std::sqrt(a.v); return a; }
inline Track tanh(Track a) { a.v = std::tanh(a.v); return a; }

/// Uniform access used by templated code that also takes plain doubles.
inline double value_of(double s) { return s; }
template <int K>
double value_of(const Dual<K>& s) { return s.v; }
inline double value_of(const Track& s) { return s.v; }

}  // namespace armada
