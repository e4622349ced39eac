#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace cablelift {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using RotationMatrix = Eigen::Matrix3d;
using UnitQuaternion = Eigen::Quaterniond;

/// Roll/pitch/yaw triple in radians.
struct EulerAngles {
  double phi = 0.0;
  double theta = 0.0;
  double psi = 0.0;

  /// True iff |phi| < pi/2 and |theta| < pi/2.
  bool in_valid_domain() const;
};

/// Guard band around |theta| = pi/2 inside which the Euler-rate map is refused.
inline constexpr double kEulerSingularityTol = 1e-6;

RotationMatrix rotation_from_euler(const EulerAngles& angles);

/// Inverse of rotation_from_euler on the valid domain.
EulerAngles euler_from_rotation(const RotationMatrix& R);

/// Matrix mapping body angular velocity to Euler-angle rates. Throws DomainError
/// near the pitch singularity.
Mat3 euler_rate_matrix(const EulerAngles& angles);

Mat3 hat(const Vec3& v);

/// Inverse of hat. Throws NotSkew when ||S + S^T|| > 1e-9.
Vec3 vee(const Mat3& S);

/// Normalizes to unit length and flips sign so that w >= 0.
UnitQuaternion hemisphere(UnitQuaternion q);

UnitQuaternion quat_from_euler(const EulerAngles& angles);

/// Exponential map from a rotation vector (radians) to a unit quaternion.
UnitQuaternion quat_exp(const Vec3& rotvec);

/// Rotation vector of q, norm in [0, pi].
Vec3 quat_log(const UnitQuaternion& q);

/// log(q * q_des^-1): world-frame rotation vector taking q_des to q.
Vec3 attitude_error_log(const UnitQuaternion& q, const UnitQuaternion& q_des);

/// Inverse of the SO(3) left Jacobian. d/d(delta) log(exp(delta) exp(phi)) at 0.
Mat3 left_jacobian_inverse(const Vec3& phi);

/// Quaternion time derivative for a body-frame angular velocity.
Eigen::Vector4d quat_derivative(const UnitQuaternion& q, const Vec3& omega_body);

}  // namespace cablelift
