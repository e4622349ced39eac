#include "cablelift/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cablelift/errors.hpp"

namespace cablelift {

namespace {

// Strict bounds treat an exact tie as a violation with a negative-zero-ish
// margin so that satisfied <=> margin >= 0 still holds.
double strict_margin(double m) { return m > 0.0 ? m : std::min(m, std::nextafter(0.0, -1.0)); }

ConstraintEntry entry(std::string id, double value, double lower, double upper, double margin) {
  return {std::move(id), value, lower, upper, margin >= 0.0, margin};
}

}  // namespace

double payload_los_error(const Vec3& p_L, const Vec3& p_des) { return (p_des - p_L).norm(); }
double mav_los_error(const Vec3& p_i, const Vec3& p_des_i) { return (p_des_i - p_i).norm(); }
double pair_separation(const Vec3& p_i, const Vec3& p_j) { return (p_i - p_j).norm(); }
double desired_pair_separation(const Vec3& p_des_i, const Vec3& p_des_j) {
  return (p_des_i - p_des_j).norm();
}
double separation_error(double desired, double actual) { return desired - actual; }
double obstacle_distance(const Vec3& p_L, const Vec3& p_O) { return (p_L - p_O).norm(); }

std::vector<Vec3> mav_desired_positions(const ReferencePoint& ref,
                                        const std::vector<Vec3>& attachments,
                                        const std::vector<double>& lengths) {
  if (attachments.size() != lengths.size()) {
    throw DimensionMismatch("mav_desired_positions: attachment and length counts differ");
  }
  std::vector<Vec3> out(attachments.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = ref.p_des + ref.attitude_des * attachments[i] + lengths[i] * Vec3::UnitZ();
  }
  return out;
}

bool ConstraintReport::all_satisfied() const { return violation_count() == 0; }

int ConstraintReport::violation_count() const {
  return static_cast<int>(std::count_if(entries.begin(), entries.end(),
                                        [](const ConstraintEntry& e) { return !e.satisfied; }));
}

int ConstraintReport::violation_count(const std::string& prefix) const {
  int n = 0;
  for (const auto& e : entries) {
    if (!e.satisfied && e.id.compare(0, prefix.size(), prefix) == 0) ++n;
  }
  return n;
}

const ConstraintEntry* ConstraintReport::find(const std::string& id) const {
  for (const auto& e : entries) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

ConstraintReport check_all(const WorldSnapshot& snap, const ReferencePoint& payload_ref,
                           const std::vector<Vec3>& mav_desired, const FunnelSet& funnels,
                           const ConstraintBounds& bounds) {
  ConstraintReport r;
  const double eps_L = funnels.payload(snap.t);
  const double e_L = payload_los_error(snap.payload_position, payload_ref.p_des);
  r.entries.push_back(entry("payload_funnel", e_L, 0.0, eps_L, strict_margin(eps_L - e_L)));

  const std::size_t n = snap.mav_positions.size();
  if (!mav_desired.empty() && mav_desired.size() != n) {
    throw DimensionMismatch("check_all: desired MAV positions count");
  }
  if (!mav_desired.empty()) {
    const double eps_i = funnels.mav(snap.t);
    for (std::size_t i = 0; i < n; ++i) {
      const double e = mav_los_error(snap.mav_positions[i], mav_desired[i]);
      r.entries.push_back(entry("mav_funnel_" + std::to_string(i), e, 0.0, eps_i,
                                strict_margin(eps_i - e)));
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double des = desired_pair_separation(mav_desired[i], mav_desired[j]);
        const double act = pair_separation(snap.mav_positions[i], snap.mav_positions[j]);
        const double e = separation_error(des, act);
        const double upper = funnels.pair_upper_fraction * des;
        const double lower = funnels.pair_lower_fraction * des;
        const double m = std::min(strict_margin(upper - e), strict_margin(e + lower));
        r.entries.push_back(entry("pair_" + std::to_string(i) + "_" + std::to_string(j), e,
                                  -lower, upper, m));
      }
    }
  }
  if (bounds.obstacle) {
    const double d = obstacle_distance(snap.payload_position, bounds.obstacle->position);
    r.entries.push_back(entry("obstacle", d, bounds.obstacle->clearance,
                              std::numeric_limits<double>::infinity(),
                              d - bounds.obstacle->clearance));
  }
  for (std::size_t i = 0; i < snap.tensions.size(); ++i) {
    const double T = std::abs(snap.tensions[i]);
    r.entries.push_back(entry("tension_" + std::to_string(i), T, 0.0, bounds.f_max,
                              bounds.f_max - T));
  }
  return r;
}

}  // namespace cablelift
