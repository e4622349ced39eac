#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "cablelift/so3.hpp"

namespace cablelift {

using Vector12d = Eigen::Matrix<double, 12, 1>;

/// Physical description of the MAV team, cables and payload. World frame is
/// z-up; gravity acts along -z.
struct SystemParams {
  std::vector<double> mav_mass;          // kg
  std::vector<Mat3> mav_inertia;         // kg m^2
  double payload_mass = 0.232;           // kg
  Mat3 payload_inertia = Mat3::Identity();
  std::vector<Vec3> attachments;         // payload frame, m
  std::vector<double> cable_length;      // m
  double thrust_max = 3.0;               // N per MAV
  double tension_max = 1.5;              // N per cable
  double gravity = 9.81;                 // m/s^2
  double cable_stiffness = 5000.0;       // N/m
  double cable_damping = 50.0;           // N s/m

  std::size_t count() const { return attachments.size(); }
  Vec3 gravity_vector() const { return Vec3(0.0, 0.0, -gravity); }

  /// Throws ConfigError on inconsistent sizes or non-physical values.
  void validate() const;
};

/// Pose and twist of one rigid body. Angular velocity is body-frame.
struct BodyState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  UnitQuaternion attitude = UnitQuaternion::Identity();
  Vec3 omega = Vec3::Zero();
};

using MavState = BodyState;
using PayloadState = BodyState;

struct FullState {
  PayloadState payload;
  std::vector<MavState> mavs;
};

struct CableReading {
  Vec3 direction = Vec3::UnitZ();  // world frame, from MAV toward attachment
  double tension = 0.0;            // N
  bool taut = false;
};

/// Time derivative of a BodyState (quaternion in Eigen coefficient order).
struct BodyDerivative {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Eigen::Vector4d attitude = Eigen::Vector4d::Zero();
  Vec3 omega = Vec3::Zero();
};

struct MavCommand {
  double thrust = 0.0;            // N along body z
  Vec3 torque = Vec3::Zero();     // N m, body frame
};

enum class DisturbanceKind { none, uniform_bounded };

/// Bounded additive disturbance on the payload's 12-dimensional tangent state
/// (position, rotation vector, velocity, angular velocity).
struct DisturbanceModel {
  DisturbanceKind kind = DisturbanceKind::none;
  double eta = 0.0;
  std::uint64_t seed = 1;
  Vector12d scale = Vector12d::Ones();  // per-component weights in [0, 1]
};

/// Stateful sampler for a DisturbanceModel. Every sample has norm <= eta.
class DisturbanceSource {
 public:
  explicit DisturbanceSource(const DisturbanceModel& model);
  Vector12d sample();
  const DisturbanceModel& model() const { return model_; }

 private:
  DisturbanceModel model_;
  std::mt19937_64 rng_;
};

double saturate_thrust(double thrust, double thrust_max);

/// Attachment point of cable i in world coordinates.
Vec3 attachment_point(const PayloadState& payload, const Vec3& r_i);

std::vector<CableReading> cable_closure(const FullState& full, const SystemParams& params);

BodyDerivative mav_derivative(const MavState& state, double thrust, const Vec3& torque,
                              const CableReading& cable, const SystemParams& params,
                              std::size_t i);

BodyDerivative payload_derivative(const PayloadState& state,
                                  const std::vector<CableReading>& cables,
                                  const SystemParams& params);

/// Packing used by the shared integrator: 13 entries per body, payload first.
Eigen::VectorXd pack_state(const FullState& full);
FullState unpack_state(const Eigen::VectorXd& x, std::size_t n_mavs);
void renormalize_quaternions(FullState& full);

struct WorldStep {
  FullState state;
  std::vector<CableReading> cables;  // readings at the start of the step
};

/// Advances the coupled system by dt with one RK4 step, then adds the given
/// disturbance sample to the payload state.
WorldStep step_world(const FullState& full, const std::vector<MavCommand>& commands,
                     const SystemParams& params, double dt,
                     const Vector12d& disturbance = Vector12d::Zero());

/// Applies a tangent-space perturbation (dp, dtheta, dv, domega) to a body.
BodyState perturb_body(const BodyState& body, const Vector12d& delta);

/// Static equilibrium with the payload level at `payload_position`, every
/// cable vertical and stretched to carry its share of the payload weight.
FullState hover_equilibrium(const SystemParams& params, const Vec3& payload_position);

/// Per-cable tension at hover for a symmetric layout.
std::vector<double> hover_tensions(const SystemParams& params);

}  // namespace cablelift
