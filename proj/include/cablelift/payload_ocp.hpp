#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cablelift/plant.hpp"
#include "cablelift/profile.hpp"
#include "cablelift/so3.hpp"
#include "cablelift/tension_allocation.hpp"

namespace cablelift {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Matrix12d = Eigen::Matrix<double, 12, 12>;
using Matrix12x6d = Eigen::Matrix<double, 12, 6>;

/// Payload state (position, attitude, velocity, body angular velocity).
/// Tangent vectors are ordered (dp, dtheta, dv, domega) with dtheta a
/// world-frame rotation vector applied on the left.
using OcpState = BodyState;

inline constexpr int kNx = 12;
inline constexpr int kNu = 6;

struct Wrench {
  Vec3 force = Vec3::Zero();   // N, world frame
  Vec3 moment = Vec3::Zero();  // N m, payload frame

  Vector6d vector() const {
    Vector6d w;
    w << force, moment;
    return w;
  }
  static Wrench from_vector(const Vector6d& w) { return {w.head<3>(), w.tail<3>()}; }
};

struct PayloadModel {
  double mass = 0.232;
  Mat3 inertia = Mat3::Identity();
  double gravity = 9.81;

  Vec3 gravity_vector() const { return Vec3(0.0, 0.0, -gravity); }
  static PayloadModel from(const SystemParams& p) {
    return {p.payload_mass, p.payload_inertia, p.gravity};
  }
};

/// Weights on the error vector ordered (position, velocity, attitude, angular
/// velocity) and on the wrench error (force, moment).
struct CostWeights {
  Matrix12d Q_X = Matrix12d::Identity();
  Matrix6d Q_U = Matrix6d::Identity();
  Matrix12d Q_XN = Matrix12d::Identity();

  /// Throws ConfigError unless Q_X, Q_U are symmetric PSD and Q_XN is SPD.
  void validate() const;
};

struct ReferencePoint {
  Vec3 p_des = Vec3::Zero();
  Vec3 v_des = Vec3::Zero();
  Vec3 a_des = Vec3::Zero();  // feedforward for the low-level loop only
  UnitQuaternion attitude_des = UnitQuaternion::Identity();
  Vec3 omega_des = Vec3::Zero();
  Wrench wrench_des;
};

struct Obstacle {
  Vec3 position = Vec3::Zero();
  double clearance = 0.0;  // minimum payload-obstacle distance, m
};

/// Per-cable bound |block_k(P_pinv) (R_ref^T F; M)| <= f_max.
struct TensionBound {
  double f_max = 1.5;
  std::vector<Eigen::Matrix<double, 3, 6>> blocks;

  static TensionBound from(const AllocationMap& map, double f_max);
};

/// Soft tracking funnel: weight * max(0, |p - p_des| - bound_i)^2 per stage.
struct Funnel {
  std::vector<double> bound;  // N + 1 entries
  double weight = 1e3;
};

enum class SolveStatus { converged, max_iter, infeasible };
const char* to_string(SolveStatus s);

struct OcpProblem {
  OcpState x0;
  int N = 20;
  double dt = 0.05;
  std::vector<ReferencePoint> references;  // N + 1 entries
  CostWeights weights;
  PayloadModel model;
  std::optional<Obstacle> obstacle;
  std::optional<TensionBound> tension;
  std::optional<Funnel> funnel;

  /// Throws ConfigError on inconsistent horizon or list lengths.
  void validate() const;
};

struct OcpSolution {
  std::vector<OcpState> states;  // N + 1
  std::vector<Wrench> inputs;    // N
  double cost = 0.0;
  double kkt_residual = 0.0;
  double max_defect = 0.0;
  double max_violation = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::max_iter;

  int horizon() const { return static_cast<int>(inputs.size()); }
};

struct OcpConfig {
  int N = 20;
  double dt = 0.05;
  CostWeights weights;
  PayloadModel model;
  std::optional<Obstacle> obstacle;
  std::optional<TensionBound> tension;
  std::optional<PiecewiseLinear> funnel;  // epsilon_d^H(t)
  double funnel_weight = 1e3;
};

Vector12d state_error(const OcpState& x, const ReferencePoint& ref);

/// d state_error / d delta at delta = 0 for x <- retract(x, delta).
Matrix12d state_error_jacobian(const OcpState& x, const ReferencePoint& ref);

Vector6d wrench_error(const Wrench& u, const ReferencePoint& ref);

BodyDerivative payload_dynamics(const OcpState& x, const Wrench& u, const PayloadModel& model);

/// One RK4 step of payload_dynamics with the quaternion renormalized.
OcpState discretize(const OcpState& x, const Wrench& u, double dt, const PayloadModel& model);

/// Same as perturb_body: p + dp, exp(dtheta) q, v + dv, omega + domega.
OcpState retract(const OcpState& x, const Vector12d& delta);

/// Tangent vector d at `from` with retract(from, d) == to.
Vector12d difference(const OcpState& from, const OcpState& to);

struct Linearization {
  Matrix12d A;
  Matrix12x6d B;
  Vector12d b;  // difference(x_next, discretize(x, u))
};

/// Central-difference Jacobians of the discrete dynamics in tangent
/// coordinates, expressed at `x_next`.
Linearization linearize_dynamics(const OcpState& x, const Wrench& u, const OcpState& x_next,
                                 double dt, const PayloadModel& model, double step = 1e-6);

/// Offsets into the stacked tangent vector [x0, u0, x1, u1, ..., xN].
inline Eigen::Index state_offset(int i) { return static_cast<Eigen::Index>(i) * (kNx + kNu); }
inline Eigen::Index input_offset(int i) { return state_offset(i) + kNx; }
inline Eigen::Index stacked_size(int N) { return state_offset(N) + kNx; }

double funnel_penalty(const OcpState& x, const ReferencePoint& ref, double bound, double weight);

double total_cost(const std::vector<OcpState>& states, const std::vector<Wrench>& inputs,
                  const OcpProblem& problem);

/// Gradient of total_cost in the stacked tangent layout.
Eigen::VectorXd cost_gradient(const std::vector<OcpState>& states,
                              const std::vector<Wrench>& inputs, const OcpProblem& problem);

/// Per-cable tension margins f_max - |mu_k| at stage i.
std::vector<double> tension_margins(const OcpProblem& problem, int stage, const Wrench& u);

/// Smooth tension row (|mu_k|^2 - f_max^2) / (2 f_max) <= 0, for every cable.
std::vector<double> tension_rows(const OcpProblem& problem, int stage, const Wrench& u);

/// clearance - |p - p_O| <= 0 for stages 1..N.
double obstacle_row(const OcpProblem& problem, const OcpState& x);

OcpProblem build_ocp(const OcpState& x0, const std::vector<ReferencePoint>& window,
                     const OcpConfig& config, double t0 = 0.0);

/// Reference inputs and a rollout of them from x0: a feasible starting guess.
OcpSolution initial_guess(const OcpProblem& problem);

}  // namespace cablelift
