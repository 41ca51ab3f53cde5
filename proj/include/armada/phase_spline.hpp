#pragma once

#include <vector>

namespace armada {

/// One Hermite segment: endpoint values/rates over a positive duration.
/// A constant segment (contact hold) is the degenerate case u0 == u1,
/// du0 == du1 == 0.
struct HermiteSegment {
  double duration = 0.0;  // [s]
  double u0 = 0.0, du0 = 0.0, u1 = 0.0, du1 = 0.0;

  static HermiteSegment constant(double value, double duration) {
    return {duration, value, 0.0, value, 0.0};
  }
};

/// Piecewise-cubic scalar channel over consecutive segments.
///
/// Invariants enforced at construction: positive durations; C0 and C1 at the
/// interior knots (consecutive segments share value and rate within 1e-9).
/// Time lookup is half-open per segment; t == total_duration() maps into the
/// final segment.
class PhaseSpline {
 public:
  PhaseSpline() = default;
  explicit PhaseSpline(std::vector<HermiteSegment> segments);

  double total_duration() const { return total_; }
  const std::vector<HermiteSegment>& segments() const { return segments_; }
  double start_time(int segment) const { return starts_[segment]; }

  double value(double t) const;
  double rate(double t) const;
  double accel(double t) const;

  /// Index of the segment owning time t (half-open; t == T -> last).
  int segment_at(double t) const;

  /// Inclusive uniform resampling: floor(T * rate_hz) + 1 samples covering
  /// both endpoints (2001 samples for T = 20 s at 100 Hz).
  std::vector<double> sample_times(double rate_hz) const;
  std::vector<double> sample_values(double rate_hz) const;

 private:
  std::vector<HermiteSegment> segments_;
  std::vector<double> starts_;
  double total_ = 0.0;
};

}  // namespace armada
