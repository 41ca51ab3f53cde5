#pragma once

#include <vector>

namespace armada {

enum class PhaseKind { Contact, Swing };

inline PhaseKind opposite(PhaseKind k) {
  return k == PhaseKind::Contact ? PhaseKind::Swing : PhaseKind::Contact;
}

/// Alternating contact/swing timeline of one arm.
struct ArmTimeline {
  PhaseKind first = PhaseKind::Contact;
  std::vector<double> durations;  // [s], strictly positive, sums to the horizon

  PhaseKind kind(int phase) const {
    return (phase % 2 == 0) ? first : opposite(first);
  }
};

struct PhaseRef {
  int index = 0;        // phase index into durations
  PhaseKind kind = PhaseKind::Contact;
  double local_time = 0.0;  // [s] measured from the phase start
  double start = 0.0, end = 0.0;
};

/// Per-arm phase bookkeeping over a shared horizon T.
///
/// Lookup is half-open [start, end) per phase; t == T belongs to the final
/// phase. Queries outside [0, T] throw.
class ContactSchedule {
 public:
  ContactSchedule() = default;
  ContactSchedule(std::vector<ArmTimeline> arms, double horizon);

  int arm_count() const { return static_cast<int>(arms_.size()); }
  double horizon() const { return horizon_; }
  const ArmTimeline& timeline(int arm) const { return arms_[arm]; }

  PhaseRef phase_at(int arm, double t) const;
  bool in_contact(int arm, double t) const;
  int count_in_contact(double t) const;

  /// Phase boundary instants of one arm, including 0 and T.
  std::vector<double> boundaries(int arm) const;

 private:
  std::vector<ArmTimeline> arms_;
  std::vector<std::vector<double>> starts_;
  double horizon_ = 0.0;
};

}  // namespace armada
