#include "cablelift/cable_control.hpp"

#include <cmath>

#include "cablelift/errors.hpp"

namespace cablelift {

namespace {

void check_gain(const Mat3& K, const char* name) {
  const Mat3 off = K - Mat3(K.diagonal().asDiagonal());
  if (off.cwiseAbs().maxCoeff() > 0.0 || !(K.diagonal().minCoeff() > 0.0)) {
    throw ConfigError(std::string("gains: ") + name + " must be diagonal with positive entries");
  }
}

}  // namespace

void GainSet::validate() const {
  check_gain(K_R, "K_R");
  check_gain(K_Omega, "K_Omega");
  check_gain(K_xi, "K_xi");
  check_gain(K_omega, "K_omega");
}

CableErrors cable_errors(const CableTrackingState& s) {
  return {s.xi_des.cross(s.xi), s.omega_cable + s.xi.cross(s.xi.cross(s.omega_des))};
}

Vec3 attachment_accel(const Vec3& payload_accel_des, const RotationMatrix& R_L,
                      const Vec3& Omega_L, const Vec3& Omega_dot_L, const Vec3& r_k,
                      double gravity) {
  const Mat3 W = hat(Omega_L);
  return payload_accel_des + gravity * Vec3::UnitZ() - R_L * hat(r_k) * Omega_dot_L +
         R_L * W * W * r_k;
}

ControlComponents control_components(const Vec3& mu, const CableTrackingState& s,
                                     const Vec3& a_c, double mass, double length,
                                     const GainSet& gains) {
  const Vec3& xi = s.xi;
  const Mat3 X = hat(xi);
  const CableErrors e = cable_errors(s);
  ControlComponents out;
  out.u_parallel = mu + mass * length * s.omega_cable.squaredNorm() * xi +
                   mass * xi * xi.dot(a_c);
  // u_perp = m l xi [-K_xi e_xi - K_w e_w - (xi.w_d) xi_dot_d - xi^2 w_dot_d] - m xi^2 a
  // with the leading xi read as hat(xi); a bare xi there would give a force
  // along the cable, not perpendicular to it.
  const Vec3 inner = -gains.K_xi * e.e_xi - gains.K_omega * e.e_omega -
                     xi.dot(s.omega_des) * s.xi_dot_des - X * X * s.omega_dot_des;
  out.u_perp = mass * length * X * inner - mass * X * X * a_c;
  return out;
}

double thrust_command(const Vec3& u, const RotationMatrix& R) { return u.dot(R.col(2)); }

RotationMatrix desired_attitude(const Vec3& u, double yaw_des) {
  const double nrm = u.norm();
  if (nrm <= 1e-6) throw DegenerateThrust("desired_attitude: thrust vector vanishes");
  const Vec3 b3 = u / nrm;
  const Vec3 heading(std::cos(yaw_des), std::sin(yaw_des), 0.0);
  const Vec3 c = b3.cross(heading);
  if (c.norm() <= 1e-6) throw DegenerateThrust("desired_attitude: thrust parallel to heading");
  const Vec3 b2 = c.normalized();
  const Vec3 b1 = b2.cross(b3);
  RotationMatrix R;
  R.col(0) = b1;
  R.col(1) = b2;
  R.col(2) = b3;
  return R;
}

AttitudeErrors attitude_errors(const RotationMatrix& R, const RotationMatrix& R_des,
                               const Vec3& omega, const Vec3& omega_des) {
  const Mat3 E = R_des.transpose() * R - R.transpose() * R_des;
  return {0.5 * vee(E), omega - R.transpose() * R_des * omega_des};
}

Vec3 moment_command(const AttitudeErrors& err, const Vec3& omega, const RotationMatrix& R,
                    const RotationMatrix& R_des, const Vec3& omega_des,
                    const Vec3& omega_dot_des, const Mat3& J, const GainSet& gains) {
  const Mat3 RtRd = R.transpose() * R_des;
  return -gains.K_R * err.e_R - gains.K_Omega * err.e_Omega + omega.cross(J * omega) -
         J * (hat(omega) * RtRd * omega_des - RtRd * omega_dot_des);
}

CableQuadrotorController::CableQuadrotorController(double mass, double length, Mat3 inertia,
                                                   GainSet gains, double dt)
    : mass_(mass), length_(length), inertia_(inertia), gains_(gains), dt_(dt) {
  if (!(dt > 0.0)) throw ConfigError("controller: dt must be positive");
}

MavControlOutput CableQuadrotorController::update(const MavState& mav,
                                                  const PayloadState& payload, const Vec3& r_k,
                                                  const Vec3& mu_des, const PayloadCommand& cmd,
                                                  double gravity, double yaw_des) {
  MavControlOutput out;
  CableTrackingState& cs = out.cable;

  const Vec3 d = attachment_point(payload, r_k) - mav.position;
  if (d.norm() < 1e-9) throw DegenerateGeometry("controller: MAV at attachment point");
  cs.xi = d.normalized();
  if (prev_xi_) {
    const Vec3 xi_dot = (cs.xi - *prev_xi_) / dt_;
    cs.omega_cable = cs.xi.cross(xi_dot);
  }
  prev_xi_ = cs.xi;

  if (mu_des.norm() > kTensionFloor) {
    const CableReference ref = desired_cable_direction(mu_des, prev_mu_des_, dt_);
    cs.xi_des = ref.xi_des;
    cs.xi_dot_des = ref.xi_dot_des;
    cs.omega_des = ref.omega_des;
    prev_mu_des_ = mu_des;
    last_xi_des_ = ref.xi_des;
  } else {
    // Hold the last direction while the desired tension vanishes.
    cs.xi_des = last_xi_des_;
    prev_mu_des_.reset();
  }

  out.mu = project_tension(mu_des, cs.xi);
  const RotationMatrix R_L = payload.attitude.toRotationMatrix();
  const Vec3 a_c = attachment_accel(cmd.accel, R_L, payload.omega, cmd.omega_dot, r_k, gravity);
  out.u = control_components(out.mu, cs, a_c, mass_, length_, gains_).total();

  const RotationMatrix R = mav.attitude.toRotationMatrix();
  const RotationMatrix R_des = desired_attitude(out.u, yaw_des);
  const AttitudeErrors err = attitude_errors(R, R_des, mav.omega, Vec3::Zero());
  out.command.thrust = thrust_command(out.u, R);
  out.command.torque =
      moment_command(err, mav.omega, R, R_des, Vec3::Zero(), Vec3::Zero(), inertia_, gains_);
  return out;
}

}  // namespace cablelift
