#include "armada/contact_schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace armada {

ContactSchedule::ContactSchedule(std::vector<ArmTimeline> arms, double horizon)
    : arms_(std::move(arms)), horizon_(horizon) {
  if (!(horizon_ > 0.0)) throw std::invalid_argument("ContactSchedule: horizon must be positive");
  starts_.resize(arms_.size());
  for (std::size_t i = 0; i < arms_.size(); ++i) {
    const ArmTimeline& arm = arms_[i];
    if (arm.durations.empty()) throw std::invalid_argument("ContactSchedule: empty timeline");
    double t = 0.0;
    for (double d : arm.durations) {
      if (!(d > 0.0)) throw std::invalid_argument("ContactSchedule: non-positive phase duration");
      starts_[i].push_back(t);
      t += d;
    }
    if (std::abs(t - horizon_) > 1e-9)
      throw std::invalid_argument("ContactSchedule: durations do not partition the horizon");
  }
}

PhaseRef ContactSchedule::phase_at(int arm, double t) const {
  if (arm < 0 || arm >= arm_count()) throw std::out_of_range("ContactSchedule: arm index");
  if (t < -1e-12 || t > horizon_ + 1e-12) throw std::out_of_range("ContactSchedule: time outside [0, T]");
  const auto& st = starts_[arm];
  const auto it = std::upper_bound(st.begin(), st.end(), t);
  int idx = std::clamp(static_cast<int>(it - st.begin()) - 1, 0, static_cast<int>(st.size()) - 1);
  PhaseRef ref;
  ref.index = idx;
  ref.kind = arms_[arm].kind(idx);
  ref.start = st[idx];
  ref.end = st[idx] + arms_[arm].durations[idx];
  ref.local_time = t - ref.start;
  return ref;
}

bool ContactSchedule::in_contact(int arm, double t) const {
  return phase_at(arm, t).kind == PhaseKind::Contact;
}

int ContactSchedule::count_in_contact(double t) const {
  int n = 0;
  for (int i = 0; i < arm_count(); ++i) n += in_contact(i, t) ? 1 : 0;
  return n;
}

std::vector<double> ContactSchedule::boundaries(int arm) const {
  if (arm < 0 || arm >= arm_count()) throw std::out_of_range("ContactSchedule: arm index");
  std::vector<double> out = starts_[arm];
  out.push_back(horizon_);
  return out;
}

}  // namespace armada
