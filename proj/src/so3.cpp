#include "cablelift/so3.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cablelift/errors.hpp"

namespace cablelift {

bool EulerAngles::in_valid_domain() const {
  constexpr double half_pi = std::numbers::pi / 2.0;
  return std::abs(phi) < half_pi && std::abs(theta) < half_pi;
}

RotationMatrix rotation_from_euler(const EulerAngles& a) {
  const double cf = std::cos(a.phi), sf = std::sin(a.phi);
  const double ct = std::cos(a.theta), st = std::sin(a.theta);
  const double cp = std::cos(a.psi), sp = std::sin(a.psi);
  RotationMatrix R;
  // Entry-for-entry the matrix of the model definition; it equals
  // Rz(phi) * Ry(theta) * Rx(psi).
  R << cf * ct, cf * st * sp - cp * sf, cp * cf * st + sf * sp,
       ct * sf, cf * cp + sf * st * sp, cp * sf * st - cf * sp,
       -st,     ct * sp,                ct * cp;
  return R;
}

EulerAngles euler_from_rotation(const RotationMatrix& R) {
  EulerAngles a;
  a.theta = -std::asin(std::clamp(R(2, 0), -1.0, 1.0));
  a.psi = std::atan2(R(2, 1), R(2, 2));
  a.phi = std::atan2(R(1, 0), R(0, 0));
  return a;
}

Mat3 euler_rate_matrix(const EulerAngles& a) {
  if (std::abs(a.theta) >= std::numbers::pi / 2.0 - kEulerSingularityTol) {
    throw DomainError("euler_rate_matrix: pitch within singularity guard band");
  }
  const double cf = std::cos(a.phi), sf = std::sin(a.phi);
  const double ct = std::cos(a.theta), tt = std::tan(a.theta);
  Mat3 G;
  G << 1.0, sf * tt, cf * tt,
       0.0, cf,      -sf,
       0.0, sf / ct, cf / ct;
  return G;
}

Mat3 hat(const Vec3& v) {
  Mat3 S;
  S << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return S;
}

Vec3 vee(const Mat3& S) {
  if ((S + S.transpose()).norm() > 1e-9) {
    throw NotSkew("vee: input is not skew-symmetric");
  }
  return Vec3(S(2, 1), S(0, 2), S(1, 0));
}

UnitQuaternion hemisphere(UnitQuaternion q) {
  q.normalize();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  return q;
}

UnitQuaternion quat_from_euler(const EulerAngles& angles) {
  return hemisphere(UnitQuaternion(rotation_from_euler(angles)));
}

UnitQuaternion quat_exp(const Vec3& rotvec) {
  const double angle = rotvec.norm();
  if (angle < 1e-12) {
    UnitQuaternion q(1.0, 0.5 * rotvec.x(), 0.5 * rotvec.y(), 0.5 * rotvec.z());
    return hemisphere(q);
  }
  const Vec3 axis = rotvec / angle;
  const double s = std::sin(0.5 * angle);
  return hemisphere(UnitQuaternion(std::cos(0.5 * angle), s * axis.x(), s * axis.y(), s * axis.z()));
}

Vec3 quat_log(const UnitQuaternion& q_in) {
  const UnitQuaternion q = hemisphere(q_in);
  const Vec3 v = q.vec();
  const double vn = v.norm();
  if (vn < 1e-12) {
    return 2.0 * v / q.w();
  }
  const double angle = 2.0 * std::atan2(vn, q.w());
  return angle * v / vn;
}

Vec3 attitude_error_log(const UnitQuaternion& q, const UnitQuaternion& q_des) {
  return quat_log(hemisphere(q * q_des.conjugate()));
}

Mat3 left_jacobian_inverse(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 P = hat(phi);
  double coeff;
  if (theta < 1e-5) {
    coeff = 1.0 / 12.0 + theta * theta / 720.0;
  } else {
    coeff = 1.0 / (theta * theta) -
            (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  }
  return Mat3::Identity() - 0.5 * P + coeff * P * P;
}

Eigen::Vector4d quat_derivative(const UnitQuaternion& q, const Vec3& w) {
  // Coefficients in Eigen storage order (x, y, z, w) of 0.5 * q (x) (0, w).
  const UnitQuaternion dq = q * UnitQuaternion(0.0, w.x(), w.y(), w.z());
  return 0.5 * dq.coeffs();
}

}  // namespace cablelift
