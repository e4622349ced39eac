#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cablelift/so3.hpp"

namespace cablelift {

/// Force/moment map of the cable team on stacked payload-frame force vectors.
struct AllocationMap {
  Eigen::MatrixXd P;       // 6 x 3n
  Eigen::MatrixXd P_pinv;  // 3n x 6, minimal-norm right inverse
  Eigen::MatrixXd Z;       // 3n x (3n - 6), orthonormal null-space basis
  std::vector<Vec3> attachments;

  std::size_t count() const { return attachments.size(); }
  /// Rows 3k..3k+2 of P_pinv.
  Eigen::Matrix<double, 3, 6> pinv_block(std::size_t k) const;
};

/// Throws RankDeficient when the attachment layout cannot produce an arbitrary
/// wrench.
AllocationMap build_allocation(const std::vector<Vec3>& attachments);

/// Minimal-norm stacked payload-frame forces for (R_L^T F; M).
Eigen::VectorXd allocate_stacked(const Vec3& force_world, const Vec3& moment_body,
                                 const RotationMatrix& R_L, const AllocationMap& map);

/// Per-cable desired force on the payload, world frame.
std::vector<Vec3> allocate(const Vec3& force_world, const Vec3& moment_body,
                           const RotationMatrix& R_L, const AllocationMap& map);

/// Payload-frame wrench reproduced by stacked payload-frame forces.
Eigen::Matrix<double, 6, 1> reconstruct(const Eigen::VectorXd& stacked, const AllocationMap& map);

struct SeparationGeometry {
  Vec3 payload_position = Vec3::Zero();
  RotationMatrix payload_rotation = RotationMatrix::Identity();
  std::vector<double> cable_length;
  double d_safe = 0.4;        // m
  double weight = 10.0;       // lambda_sep
};

struct Redistribution {
  std::vector<Vec3> mu_des;   // world frame
  Eigen::VectorXd c;          // null-space coefficients
};

/// MAV positions predicted by the static cable model when the world-frame
/// forces change from `base` to `adjusted`, starting from `mav_positions`.
std::vector<Vec3> predicted_mav_positions(const std::vector<Vec3>& base,
                                          const std::vector<Vec3>& adjusted,
                                          const std::vector<Vec3>& mav_positions,
                                          const SeparationGeometry& geom);

/// Smallest pairwise distance of a point set.
double min_pairwise_distance(const std::vector<Vec3>& points);

/// One Gauss-Newton step on lambda * sum hinge(d_safe - delta_ij)^2 + |c|^2,
/// applied in the null space of the allocation.
Redistribution nullspace_redistribute(const std::vector<Vec3>& mu_des,
                                      const std::vector<Vec3>& mav_positions,
                                      const AllocationMap& map, const SeparationGeometry& geom);

/// Adds Z c (payload frame) to world-frame forces.
std::vector<Vec3> apply_nullspace(const std::vector<Vec3>& mu_des, const Eigen::VectorXd& c,
                                  const RotationMatrix& R_L, const AllocationMap& map);

Vec3 project_tension(const Vec3& mu_des, const Vec3& xi);

inline constexpr double kTensionFloor = 1e-6;

struct CableReference {
  Vec3 xi_des = -Vec3::UnitZ();
  Vec3 xi_dot_des = Vec3::Zero();
  Vec3 omega_des = Vec3::Zero();
};

/// Direction from MAV toward the payload plus its rate. `mu_prev` absent on
/// the first tick. Throws ZeroTension below kTensionFloor.
CableReference desired_cable_direction(const Vec3& mu_des, const std::optional<Vec3>& mu_prev,
                                       double dt);

}  // namespace cablelift
