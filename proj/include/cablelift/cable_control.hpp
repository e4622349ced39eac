#pragma once

#include <optional>

#include "cablelift/plant.hpp"
#include "cablelift/so3.hpp"
#include "cablelift/tension_allocation.hpp"

namespace cablelift {

struct GainSet {
  Mat3 K_R = 0.5 * Mat3::Identity();
  Mat3 K_Omega = Vec3(0.016, 0.016, 0.025).asDiagonal();
  Mat3 K_xi = 30.0 * Mat3::Identity();
  Mat3 K_omega = 8.0 * Mat3::Identity();

  /// Throws ConfigError unless every gain is diagonal with positive entries.
  void validate() const;
};

struct CableTrackingState {
  Vec3 xi = -Vec3::UnitZ();          // current direction, MAV toward payload
  Vec3 omega_cable = Vec3::Zero();
  Vec3 xi_des = -Vec3::UnitZ();
  Vec3 omega_des = Vec3::Zero();
  Vec3 xi_dot_des = Vec3::Zero();
  Vec3 omega_dot_des = Vec3::Zero();
};

struct CableErrors {
  Vec3 e_xi;
  Vec3 e_omega;
};

CableErrors cable_errors(const CableTrackingState& s);

/// Acceleration the attachment point needs, plus gravity compensation.
Vec3 attachment_accel(const Vec3& payload_accel_des, const RotationMatrix& R_L,
                      const Vec3& Omega_L, const Vec3& Omega_dot_L, const Vec3& r_k,
                      double gravity);

struct ControlComponents {
  Vec3 u_parallel;
  Vec3 u_perp;
  Vec3 total() const { return u_parallel + u_perp; }
};

ControlComponents control_components(const Vec3& mu, const CableTrackingState& s,
                                     const Vec3& a_c, double mass, double length,
                                     const GainSet& gains);

double thrust_command(const Vec3& u, const RotationMatrix& R);

/// Throws DegenerateThrust for a vanishing or heading-aligned force.
RotationMatrix desired_attitude(const Vec3& u, double yaw_des);

struct AttitudeErrors {
  Vec3 e_R;
  Vec3 e_Omega;
};

AttitudeErrors attitude_errors(const RotationMatrix& R, const RotationMatrix& R_des,
                               const Vec3& omega, const Vec3& omega_des);

Vec3 moment_command(const AttitudeErrors& err, const Vec3& omega, const RotationMatrix& R,
                    const RotationMatrix& R_des, const Vec3& omega_des,
                    const Vec3& omega_dot_des, const Mat3& J, const GainSet& gains);

/// Inputs shared by every MAV's controller on one low-level tick.
struct PayloadCommand {
  Vec3 force = Vec3::Zero();       // world frame
  Vec3 moment = Vec3::Zero();      // payload frame
  Vec3 accel = Vec3::Zero();       // desired payload acceleration, world
  Vec3 omega_dot = Vec3::Zero();   // desired payload angular acceleration, body
};

struct MavControlOutput {
  MavCommand command;
  Vec3 u = Vec3::Zero();
  Vec3 mu = Vec3::Zero();
  CableTrackingState cable;
};

/// Per-MAV controller; keeps the finite-difference memory for the measured
/// cable rate and the desired direction rate.
class CableQuadrotorController {
 public:
  CableQuadrotorController(double mass, double length, Mat3 inertia,
                           GainSet gains, double dt);

  /// `mu_des` is the world-frame force this cable should exert on the payload.
  MavControlOutput update(const MavState& mav, const PayloadState& payload, const Vec3& r_k,
                          const Vec3& mu_des, const PayloadCommand& cmd, double gravity,
                          double yaw_des = 0.0);

 private:
  double mass_;
  double length_;
  Mat3 inertia_;
  GainSet gains_;
  double dt_;
  std::optional<Vec3> prev_xi_;
  std::optional<Vec3> prev_mu_des_;
  Vec3 last_xi_des_ = -Vec3::UnitZ();
};

}  // namespace cablelift
