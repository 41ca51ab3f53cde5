#include "armada/phase_spline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "armada/hermite.hpp"

namespace armada {

PhaseSpline::PhaseSpline(std::vector<HermiteSegment> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) throw std::invalid_argument("PhaseSpline: no segments");
  starts_.reserve(segments_.size());
  double t = 0.0;
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    const HermiteSegment& s = segments_[k];
    if (!(s.duration > 0.0)) throw std::invalid_argument("PhaseSpline: non-positive duration");
    if (k > 0) {
      const HermiteSegment& p = segments_[k - 1];
      if (std::abs(p.u1 - s.u0) > 1e-9 || std::abs(p.du1 - s.du0) > 1e-9)
        throw std::invalid_argument("PhaseSpline: C1 break at knot");
    }
    starts_.push_back(t);
    t += s.duration;
  }
  total_ = t;
}

int PhaseSpline::segment_at(double t) const {
  if (t < -1e-12 || t > total_ + 1e-12) throw std::out_of_range("PhaseSpline: time outside [0, T]");
  const auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
  int idx = static_cast<int>(it - starts_.begin()) - 1;
  return std::clamp(idx, 0, static_cast<int>(segments_.size()) - 1);
}

double PhaseSpline::value(double t) const {
  const int k = segment_at(t);
  const HermiteSegment& s = segments_[k];
  const auto a = hermite_coefficients(s.u0, s.du0, s.u1, s.du1, s.duration);
  return hermite_value(a, t - starts_[k]);
}

double PhaseSpline::rate(double t) const {
  const int k = segment_at(t);
  const HermiteSegment& s = segments_[k];
  const auto a = hermite_coefficients(s.u0, s.du0, s.u1, s.du1, s.duration);
  return hermite_rate(a, t - starts_[k]);
}

double PhaseSpline::accel(double t) const {
  const int k = segment_at(t);
  const HermiteSegment& s = segments_[k];
  const auto a = hermite_coefficients(s.u0, s.du0, s.u1, s.du1, s.duration);
  return hermite_accel(a, t - starts_[k]);
}

std::vector<double> PhaseSpline::sample_times(double rate_hz) const {
  if (!(rate_hz > 0.0)) throw std::invalid_argument("PhaseSpline: rate must be positive");
  const int n = static_cast<int>(std::floor(total_ * rate_hz + 1e-9)) + 1;
  std::vector<double> times(n);
  for (int k = 0; k < n; ++k) times[k] = std::min(k / rate_hz, total_);
  return times;
}

std::vector<double> PhaseSpline::sample_values(double rate_hz) const {
  std::vector<double> out;
  for (double t : sample_times(rate_hz)) out.push_back(value(t));
  return out;
}

}  // namespace armada
