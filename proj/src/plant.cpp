#include "cablelift/plant.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cablelift/errors.hpp"
#include "cablelift/rk4.hpp"

namespace cablelift {

namespace {

constexpr int kBodyDim = 13;

bool is_spd(const Mat3& J) {
  if ((J - J.transpose()).norm() > 1e-12 * std::max(1.0, J.norm())) return false;
  Eigen::SelfAdjointEigenSolver<Mat3> es(J);
  return es.eigenvalues().minCoeff() > 0.0;
}

void write_body(Eigen::VectorXd& x, Eigen::Index offset, const BodyState& b) {
  x.segment<3>(offset) = b.position;
  x.segment<3>(offset + 3) = b.velocity;
  x.segment<4>(offset + 6) = b.attitude.coeffs();
  x.segment<3>(offset + 10) = b.omega;
}

BodyState read_body(const Eigen::VectorXd& x, Eigen::Index offset) {
  BodyState b;
  b.position = x.segment<3>(offset);
  b.velocity = x.segment<3>(offset + 3);
  b.attitude.coeffs() = x.segment<4>(offset + 6);
  b.omega = x.segment<3>(offset + 10);
  return b;
}

void write_derivative(Eigen::VectorXd& x, Eigen::Index offset, const BodyDerivative& d) {
  x.segment<3>(offset) = d.position;
  x.segment<3>(offset + 3) = d.velocity;
  x.segment<4>(offset + 6) = d.attitude;
  x.segment<3>(offset + 10) = d.omega;
}

}  // namespace

void SystemParams::validate() const {
  const std::size_t n = attachments.size();
  if (n < 3) throw ConfigError("system: at least 3 MAVs are required");
  if (mav_mass.size() != n || mav_inertia.size() != n || cable_length.size() != n) {
    throw ConfigError("system: per-MAV arrays must all have length n = " + std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(mav_mass[i] > 0.0)) throw ConfigError("system: MAV mass must be positive");
    if (!is_spd(mav_inertia[i])) throw ConfigError("system: MAV inertia must be SPD");
    if (!(cable_length[i] > 0.0)) throw ConfigError("system: cable length must be positive");
  }
  if (!(payload_mass > 0.0)) throw ConfigError("system: payload mass must be positive");
  if (!is_spd(payload_inertia)) throw ConfigError("system: payload inertia must be SPD");
  if (!(thrust_max > 0.0)) throw ConfigError("system: thrust_max must be positive");
  if (!(tension_max > 0.0)) throw ConfigError("system: tension_max must be positive");
  if (!(gravity > 0.0)) throw ConfigError("system: gravity must be positive");
  if (!(cable_stiffness > 0.0) || cable_damping < 0.0) {
    throw ConfigError("system: cable stiffness must be positive and damping non-negative");
  }
}

DisturbanceSource::DisturbanceSource(const DisturbanceModel& model)
    : model_(model), rng_(model.seed) {}

Vector12d DisturbanceSource::sample() {
  if (model_.kind == DisturbanceKind::none || model_.eta <= 0.0) return Vector12d::Zero();
  // Uniform direction and uniform radius in [0, eta], then per-component
  // weights (each <= 1) which can only shrink the norm.
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector12d dir;
  for (int i = 0; i < 12; ++i) dir[i] = normal(rng_);
  const double nrm = dir.norm();
  if (nrm < 1e-300) return Vector12d::Zero();
  const double radius = model_.eta * unit(rng_);
  Vector12d d = (radius / nrm) * dir;
  return d.cwiseProduct(model_.scale.cwiseMax(0.0).cwiseMin(1.0));
}

double saturate_thrust(double thrust, double thrust_max) {
  if (thrust >= thrust_max) return thrust_max;
  return std::max(thrust, 0.0);
}

Vec3 attachment_point(const PayloadState& payload, const Vec3& r_i) {
  return payload.position + payload.attitude * r_i;
}

std::vector<CableReading> cable_closure(const FullState& full, const SystemParams& params) {
  const std::size_t n = params.count();
  if (full.mavs.size() != n) throw DimensionMismatch("cable_closure: MAV count mismatch");
  std::vector<CableReading> out(n);
  const PayloadState& L = full.payload;
  const Mat3 R_L = L.attitude.toRotationMatrix();
  const Vec3 omega_world = R_L * L.omega;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 arm = R_L * params.attachments[i];
    const Vec3 d = L.position + arm - full.mavs[i].position;
    const double len = d.norm();
    if (len < 1e-9) throw DegenerateGeometry("cable_closure: MAV coincides with attachment point");
    CableReading& c = out[i];
    c.direction = d / len;
    const double stretch = len - params.cable_length[i];
    if (stretch > 0.0) {
      const Vec3 attach_vel = L.velocity + omega_world.cross(arm);
      const double stretch_rate = c.direction.dot(attach_vel - full.mavs[i].velocity);
      c.taut = true;
      c.tension = params.cable_stiffness * stretch +
                  params.cable_damping * std::max(0.0, stretch_rate);
    } else {
      c.taut = false;
      c.tension = 0.0;
    }
  }
  return out;
}

BodyDerivative mav_derivative(const MavState& s, double thrust, const Vec3& torque,
                              const CableReading& cable, const SystemParams& params,
                              std::size_t i) {
  const double m = params.mav_mass[i];
  const Mat3& J = params.mav_inertia[i];
  BodyDerivative d;
  d.position = s.velocity;
  const Vec3 thrust_dir = s.attitude * Vec3::UnitZ();
  d.velocity = (thrust * thrust_dir + cable.tension * cable.direction) / m +
               params.gravity_vector();
  d.attitude = quat_derivative(s.attitude, s.omega);
  d.omega = J.ldlt().solve(torque - s.omega.cross(J * s.omega));
  return d;
}

BodyDerivative payload_derivative(const PayloadState& s,
                                  const std::vector<CableReading>& cables,
                                  const SystemParams& params) {
  if (cables.size() != params.count()) throw DimensionMismatch("payload_derivative: cable count");
  const Mat3 R_L = s.attitude.toRotationMatrix();
  Vec3 force = Vec3::Zero();
  Vec3 moment = Vec3::Zero();
  for (std::size_t i = 0; i < cables.size(); ++i) {
    const Vec3 f_world = -cables[i].tension * cables[i].direction;
    force += f_world;
    moment += params.attachments[i].cross(R_L.transpose() * f_world);
  }
  const Mat3& J = params.payload_inertia;
  BodyDerivative d;
  d.position = s.velocity;
  d.velocity = force / params.payload_mass + params.gravity_vector();
  d.attitude = quat_derivative(s.attitude, s.omega);
  d.omega = J.ldlt().solve(moment - s.omega.cross(J * s.omega));
  return d;
}

Eigen::VectorXd pack_state(const FullState& full) {
  Eigen::VectorXd x(kBodyDim * static_cast<Eigen::Index>(1 + full.mavs.size()));
  write_body(x, 0, full.payload);
  for (std::size_t i = 0; i < full.mavs.size(); ++i) {
    write_body(x, kBodyDim * static_cast<Eigen::Index>(i + 1), full.mavs[i]);
  }
  return x;
}

FullState unpack_state(const Eigen::VectorXd& x, std::size_t n_mavs) {
  if (x.size() != kBodyDim * static_cast<Eigen::Index>(1 + n_mavs)) {
    throw DimensionMismatch("unpack_state: vector length");
  }
  FullState full;
  full.payload = read_body(x, 0);
  full.mavs.resize(n_mavs);
  for (std::size_t i = 0; i < n_mavs; ++i) {
    full.mavs[i] = read_body(x, kBodyDim * static_cast<Eigen::Index>(i + 1));
  }
  return full;
}

void renormalize_quaternions(FullState& full) {
  full.payload.attitude = hemisphere(full.payload.attitude);
  for (auto& m : full.mavs) m.attitude = hemisphere(m.attitude);
}

WorldStep step_world(const FullState& full, const std::vector<MavCommand>& commands,
                     const SystemParams& params, double dt, const Vector12d& disturbance) {
  const std::size_t n = params.count();
  if (commands.size() != n) throw DimensionMismatch("step_world: command count mismatch");
  std::vector<double> thrust(n);
  for (std::size_t i = 0; i < n; ++i) {
    thrust[i] = saturate_thrust(commands[i].thrust, params.thrust_max);
  }

  auto derivative = [&](const Eigen::VectorXd& x) {
    const FullState s = unpack_state(x, n);
    const auto cables = cable_closure(s, params);
    Eigen::VectorXd dx(x.size());
    write_derivative(dx, 0, payload_derivative(s.payload, cables, params));
    for (std::size_t i = 0; i < n; ++i) {
      write_derivative(dx, kBodyDim * static_cast<Eigen::Index>(i + 1),
                       mav_derivative(s.mavs[i], thrust[i], commands[i].torque, cables[i],
                                      params, i));
    }
    return dx;
  };

  WorldStep out;
  out.cables = cable_closure(full, params);
  out.state = unpack_state(rk4_step(derivative, pack_state(full), dt), n);
  renormalize_quaternions(out.state);
  if (!disturbance.isZero(0.0)) {
    out.state.payload = perturb_body(out.state.payload, disturbance);
  }
  return out;
}

BodyState perturb_body(const BodyState& body, const Vector12d& delta) {
  BodyState out = body;
  out.position += delta.segment<3>(0);
  out.attitude = hemisphere(quat_exp(delta.segment<3>(3)) * body.attitude);
  out.velocity += delta.segment<3>(6);
  out.omega += delta.segment<3>(9);
  return out;
}

std::vector<double> hover_tensions(const SystemParams& params) {
  const std::size_t n = params.count();
  // Vertical tensions T_i with sum T_i = m_L g and zero net moment; minimal norm.
  Eigen::MatrixXd A(3, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    A(0, c) = 1.0;
    A(1, c) = params.attachments[i].y();
    A(2, c) = -params.attachments[i].x();
  }
  Eigen::Vector3d b(params.payload_mass * params.gravity, 0.0, 0.0);
  const Eigen::VectorXd T = A.completeOrthogonalDecomposition().solve(b);
  return {T.data(), T.data() + T.size()};
}

FullState hover_equilibrium(const SystemParams& params, const Vec3& payload_position) {
  FullState full;
  full.payload.position = payload_position;
  const auto tensions = hover_tensions(params);
  full.mavs.resize(params.count());
  for (std::size_t i = 0; i < params.count(); ++i) {
    const double stretch = tensions[i] / params.cable_stiffness;
    full.mavs[i].position = payload_position + params.attachments[i] +
                            (params.cable_length[i] + stretch) * Vec3::UnitZ();
  }
  return full;
}

}  // namespace cablelift
