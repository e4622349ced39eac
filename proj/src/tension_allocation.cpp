#include "cablelift/tension_allocation.hpp"

#include <cmath>
#include <limits>

#include "cablelift/errors.hpp"

namespace cablelift {

Eigen::Matrix<double, 3, 6> AllocationMap::pinv_block(std::size_t k) const {
  return P_pinv.block<3, 6>(3 * static_cast<Eigen::Index>(k), 0);
}

AllocationMap build_allocation(const std::vector<Vec3>& attachments) {
  const auto n = static_cast<Eigen::Index>(attachments.size());
  if (n < 3) throw RankDeficient("build_allocation: need at least 3 cables");
  AllocationMap map;
  map.attachments = attachments;
  map.P.setZero(6, 3 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    map.P.block<3, 3>(0, 3 * i) = Mat3::Identity();
    map.P.block<3, 3>(3, 3 * i) = hat(attachments[static_cast<std::size_t>(i)]);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(map.P, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(5) <= 1e-9 * std::max(1.0, sv(0))) {
    throw RankDeficient("build_allocation: attachment layout has rank < 6");
  }
  const Eigen::MatrixXd& U = svd.matrixU();
  const Eigen::MatrixXd& V = svd.matrixV();
  map.P_pinv = V.leftCols(6) * sv.head(6).cwiseInverse().asDiagonal() * U.transpose();
  map.Z = V.rightCols(3 * n - 6);
  return map;
}

Eigen::VectorXd allocate_stacked(const Vec3& force_world, const Vec3& moment_body,
                                 const RotationMatrix& R_L, const AllocationMap& map) {
  Eigen::Matrix<double, 6, 1> w;
  w << R_L.transpose() * force_world, moment_body;
  return map.P_pinv * w;
}

std::vector<Vec3> allocate(const Vec3& force_world, const Vec3& moment_body,
                           const RotationMatrix& R_L, const AllocationMap& map) {
  const Eigen::VectorXd s = allocate_stacked(force_world, moment_body, R_L, map);
  std::vector<Vec3> out(map.count());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = R_L * s.segment<3>(3 * static_cast<Eigen::Index>(k));
  }
  return out;
}

Eigen::Matrix<double, 6, 1> reconstruct(const Eigen::VectorXd& stacked, const AllocationMap& map) {
  if (stacked.size() != map.P.cols()) throw DimensionMismatch("reconstruct: stacked length");
  return map.P * stacked;
}

std::vector<Vec3> apply_nullspace(const std::vector<Vec3>& mu_des, const Eigen::VectorXd& c,
                                  const RotationMatrix& R_L, const AllocationMap& map) {
  if (mu_des.size() != map.count() || c.size() != map.Z.cols()) {
    throw DimensionMismatch("apply_nullspace: sizes");
  }
  const Eigen::VectorXd delta = map.Z * c;
  std::vector<Vec3> out(mu_des.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = mu_des[k] + R_L * delta.segment<3>(3 * static_cast<Eigen::Index>(k));
  }
  return out;
}

namespace {

Vec3 static_offset(const Vec3& mu, double length) {
  const double nrm = mu.norm();
  if (nrm <= kTensionFloor) return Vec3::Zero();
  return length * mu / nrm;
}

}  // namespace

std::vector<Vec3> predicted_mav_positions(const std::vector<Vec3>& base,
                                          const std::vector<Vec3>& adjusted,
                                          const std::vector<Vec3>& mav_positions,
                                          const SeparationGeometry& geom) {
  std::vector<Vec3> out(mav_positions.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    // static_i(c) - static_i(0); the payload terms cancel.
    out[i] = mav_positions[i] + static_offset(adjusted[i], geom.cable_length[i]) -
             static_offset(base[i], geom.cable_length[i]);
  }
  return out;
}

double min_pairwise_distance(const std::vector<Vec3>& points) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      best = std::min(best, (points[i] - points[j]).norm());
    }
  }
  return best;
}

Redistribution nullspace_redistribute(const std::vector<Vec3>& mu_des,
                                      const std::vector<Vec3>& mav_positions,
                                      const AllocationMap& map, const SeparationGeometry& geom) {
  const std::size_t n = map.count();
  if (mu_des.size() != n || mav_positions.size() != n || geom.cable_length.size() != n) {
    throw DimensionMismatch("nullspace_redistribute: sizes");
  }
  const Eigen::Index nc = map.Z.cols();
  Redistribution out;
  out.mu_des = mu_des;
  out.c = Eigen::VectorXd::Zero(nc);

  // d(MAV_i)/dc for the static model, world frame.
  std::vector<Eigen::MatrixXd> dq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double nrm = mu_des[i].norm();
    if (nrm <= kTensionFloor) {
      dq[i] = Eigen::MatrixXd::Zero(3, nc);
      continue;
    }
    const Vec3 u = mu_des[i] / nrm;
    const Mat3 proj = (Mat3::Identity() - u * u.transpose()) / nrm;
    dq[i] = geom.cable_length[i] * proj * geom.payload_rotation *
            map.Z.middleRows(3 * static_cast<Eigen::Index>(i), 3);
  }

  const double sw = std::sqrt(geom.weight);
  Eigen::MatrixXd JtJ = Eigen::MatrixXd::Identity(nc, nc);
  Eigen::VectorXd Jtr = Eigen::VectorXd::Zero(nc);
  bool active = false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vec3 d = mav_positions[i] - mav_positions[j];
      const double dist = d.norm();
      if (dist >= geom.d_safe || dist < 1e-12) continue;
      active = true;
      const double r = sw * (geom.d_safe - dist);
      const Eigen::RowVectorXd J = -sw * (d / dist).transpose() * (dq[i] - dq[j]);
      JtJ += J.transpose() * J;
      Jtr += J.transpose() * r;
    }
  }
  if (!active) return out;
  out.c = JtJ.ldlt().solve(-Jtr);
  out.mu_des = apply_nullspace(mu_des, out.c, geom.payload_rotation, map);
  return out;
}

Vec3 project_tension(const Vec3& mu_des, const Vec3& xi) {
  return xi * xi.dot(mu_des);
}

CableReference desired_cable_direction(const Vec3& mu_des, const std::optional<Vec3>& mu_prev,
                                       double dt) {
  const double nrm = mu_des.norm();
  if (nrm <= kTensionFloor) throw ZeroTension("desired_cable_direction: tension below floor");
  CableReference ref;
  ref.xi_des = -mu_des / nrm;
  if (mu_prev && mu_prev->norm() > kTensionFloor && dt > 0.0) {
    const Vec3 xi_prev = -*mu_prev / mu_prev->norm();
    ref.xi_dot_des = (ref.xi_des - xi_prev) / dt;
  }
  ref.omega_des = ref.xi_des.cross(ref.xi_dot_des);
  return ref;
}

}  // namespace cablelift
