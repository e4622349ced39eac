#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cablelift/payload_ocp.hpp"
#include "cablelift/profile.hpp"
#include "cablelift/so3.hpp"

namespace cablelift {

double payload_los_error(const Vec3& p_L, const Vec3& p_des);
double mav_los_error(const Vec3& p_i, const Vec3& p_des_i);
double pair_separation(const Vec3& p_i, const Vec3& p_j);
double desired_pair_separation(const Vec3& p_des_i, const Vec3& p_des_j);
/// Desired minus actual separation; positive when the pair is too close.
double separation_error(double desired, double actual);
double obstacle_distance(const Vec3& p_L, const Vec3& p_O);

/// Desired MAV positions: hanging straight above each attachment point of
/// the reference pose.
std::vector<Vec3> mav_desired_positions(const ReferencePoint& ref,
                                        const std::vector<Vec3>& attachments,
                                        const std::vector<double>& lengths);

struct FunnelSet {
  PiecewiseLinear payload{0.2};   // epsilon_d^H
  PiecewiseLinear mav{0.2};       // epsilon_d^{H_i}
  double pair_upper_fraction = 0.3;  // epsilon_H = fraction * desired separation
  double pair_lower_fraction = 0.3;  // epsilon_W
};

struct ConstraintBounds {
  double f_max = 1.5;
  std::optional<Obstacle> obstacle;
};

struct ConstraintEntry {
  std::string id;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool satisfied = true;
  double margin = 0.0;  // >= 0 iff satisfied
};

struct ConstraintReport {
  std::vector<ConstraintEntry> entries;

  bool all_satisfied() const;
  int violation_count() const;
  int violation_count(const std::string& prefix) const;
  const ConstraintEntry* find(const std::string& id) const;
};

struct WorldSnapshot {
  double t = 0.0;
  Vec3 payload_position = Vec3::Zero();
  std::vector<Vec3> mav_positions;
  std::vector<double> tensions;
};

/// Ids: "payload_funnel", "mav_funnel_<i>", "pair_<i>_<j>", "obstacle",
/// "tension_<i>". Violations are reported, never thrown.
ConstraintReport check_all(const WorldSnapshot& snap, const ReferencePoint& payload_ref,
                           const std::vector<Vec3>& mav_desired, const FunnelSet& funnels,
                           const ConstraintBounds& bounds);

}  // namespace cablelift
