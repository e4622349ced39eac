#include "cablelift/payload_ocp.hpp"

#include <algorithm>
#include <cmath>

#include "cablelift/errors.hpp"
#include "cablelift/rk4.hpp"

namespace cablelift {

namespace {

using Vector13d = Eigen::Matrix<double, 13, 1>;

template <int D>
double min_eigenvalue(const Eigen::Matrix<double, D, D>& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, D, D>> es(M);
  return es.eigenvalues().minCoeff();
}

template <int D>
bool symmetric(const Eigen::Matrix<double, D, D>& M) {
  return (M - M.transpose()).norm() <= 1e-12 * std::max(1.0, M.norm());
}

Vector13d pack(const OcpState& x) {
  Vector13d v;
  v << x.position, x.velocity, x.attitude.coeffs(), x.omega;
  return v;
}

OcpState unpack(const Vector13d& v) {
  OcpState x;
  x.position = v.segment<3>(0);
  x.velocity = v.segment<3>(3);
  x.attitude.coeffs() = v.segment<4>(6);
  x.attitude = hemisphere(x.attitude);
  x.omega = v.segment<3>(10);
  return x;
}

Eigen::Matrix<double, 6, 1> payload_frame_wrench(const Wrench& u, const UnitQuaternion& q_ref) {
  Eigen::Matrix<double, 6, 1> w;
  w << q_ref.conjugate() * u.force, u.moment;
  return w;
}

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iter: return "max_iter";
    case SolveStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

void CostWeights::validate() const {
  if (!symmetric(Q_X) || !symmetric(Q_U) || !symmetric(Q_XN)) {
    throw ConfigError("weights: matrices must be symmetric");
  }
  if (min_eigenvalue(Q_X) < -1e-12 || min_eigenvalue(Q_U) < -1e-12) {
    throw ConfigError("weights: Q_X and Q_U must be positive semidefinite");
  }
  if (!(min_eigenvalue(Q_XN) > 0.0)) throw ConfigError("weights: Q_XN must be positive definite");
}

TensionBound TensionBound::from(const AllocationMap& map, double f_max) {
  if (!(f_max > 0.0)) throw ConfigError("tension bound: f_max must be positive");
  TensionBound t;
  t.f_max = f_max;
  for (std::size_t k = 0; k < map.count(); ++k) t.blocks.push_back(map.pinv_block(k));
  return t;
}

void OcpProblem::validate() const {
  if (N < 1) throw ConfigError("ocp: horizon must be >= 1");
  if (!(dt > 0.0)) throw ConfigError("ocp: dt must be positive");
  if (references.size() != static_cast<std::size_t>(N) + 1) {
    throw ConfigError("ocp: reference list must have N + 1 entries");
  }
  if (funnel && funnel->bound.size() != static_cast<std::size_t>(N) + 1) {
    throw ConfigError("ocp: funnel bound list must have N + 1 entries");
  }
}

Vector12d state_error(const OcpState& x, const ReferencePoint& ref) {
  Vector12d e;
  e << ref.p_des - x.position, ref.v_des - x.velocity,
      attitude_error_log(x.attitude, ref.attitude_des), ref.omega_des - x.omega;
  return e;
}

Matrix12d state_error_jacobian(const OcpState& x, const ReferencePoint& ref) {
  Matrix12d J = Matrix12d::Zero();
  J.block<3, 3>(0, 0) = -Mat3::Identity();
  J.block<3, 3>(3, 6) = -Mat3::Identity();
  J.block<3, 3>(6, 3) = left_jacobian_inverse(attitude_error_log(x.attitude, ref.attitude_des));
  J.block<3, 3>(9, 9) = -Mat3::Identity();
  return J;
}

Vector6d wrench_error(const Wrench& u, const ReferencePoint& ref) {
  Vector6d e;
  e << ref.wrench_des.force - u.force, ref.wrench_des.moment - u.moment;
  return e;
}

BodyDerivative payload_dynamics(const OcpState& x, const Wrench& u, const PayloadModel& model) {
  BodyDerivative d;
  d.position = x.velocity;
  d.velocity = u.force / model.mass + model.gravity_vector();
  d.attitude = quat_derivative(x.attitude, x.omega);
  d.omega = model.inertia.ldlt().solve(u.moment - x.omega.cross(model.inertia * x.omega));
  return d;
}

OcpState discretize(const OcpState& x, const Wrench& u, double dt, const PayloadModel& model) {
  auto f = [&](const Vector13d& v) {
    OcpState s;
    s.position = v.segment<3>(0);
    s.velocity = v.segment<3>(3);
    s.attitude.coeffs() = v.segment<4>(6);
    s.omega = v.segment<3>(10);
    const BodyDerivative d = payload_dynamics(s, u, model);
    Vector13d dv;
    dv << d.position, d.velocity, d.attitude, d.omega;
    return dv;
  };
  return unpack(rk4_step(f, pack(x), dt));
}

OcpState retract(const OcpState& x, const Vector12d& delta) { return perturb_body(x, delta); }

Vector12d difference(const OcpState& from, const OcpState& to) {
  Vector12d d;
  d << to.position - from.position, attitude_error_log(to.attitude, from.attitude),
      to.velocity - from.velocity, to.omega - from.omega;
  return d;
}

Linearization linearize_dynamics(const OcpState& x, const Wrench& u, const OcpState& x_next,
                                 double dt, const PayloadModel& model, double step) {
  Linearization lin;
  lin.b = difference(x_next, discretize(x, u, dt, model));
  for (int j = 0; j < kNx; ++j) {
    Vector12d d = Vector12d::Zero();
    d[j] = step;
    const Vector12d fp = difference(x_next, discretize(retract(x, d), u, dt, model));
    const Vector12d fm = difference(x_next, discretize(retract(x, -d), u, dt, model));
    lin.A.col(j) = (fp - fm) / (2.0 * step);
  }
  const Vector6d w = u.vector();
  for (int j = 0; j < kNu; ++j) {
    Vector6d wp = w, wm = w;
    wp[j] += step;
    wm[j] -= step;
    const Vector12d fp = difference(x_next, discretize(x, Wrench::from_vector(wp), dt, model));
    const Vector12d fm = difference(x_next, discretize(x, Wrench::from_vector(wm), dt, model));
    lin.B.col(j) = (fp - fm) / (2.0 * step);
  }
  return lin;
}

double funnel_penalty(const OcpState& x, const ReferencePoint& ref, double bound, double weight) {
  const double h = std::max(0.0, (x.position - ref.p_des).norm() - bound);
  return weight * h * h;
}

double total_cost(const std::vector<OcpState>& states, const std::vector<Wrench>& inputs,
                  const OcpProblem& problem) {
  const int N = problem.N;
  if (states.size() != static_cast<std::size_t>(N) + 1 ||
      inputs.size() != static_cast<std::size_t>(N) ||
      problem.references.size() != static_cast<std::size_t>(N) + 1) {
    throw DimensionMismatch("total_cost: trajectory lengths do not match the horizon");
  }
  double cost = 0.0;
  for (int i = 0; i < N; ++i) {
    const auto& ref = problem.references[static_cast<std::size_t>(i)];
    const Vector12d e = state_error(states[static_cast<std::size_t>(i)], ref);
    const Vector6d eu = wrench_error(inputs[static_cast<std::size_t>(i)], ref);
    cost += e.dot(problem.weights.Q_X * e) + eu.dot(problem.weights.Q_U * eu);
  }
  const Vector12d eN = state_error(states.back(), problem.references.back());
  cost += eN.dot(problem.weights.Q_XN * eN);
  if (problem.funnel) {
    for (int i = 0; i <= N; ++i) {
      const auto s = static_cast<std::size_t>(i);
      cost += funnel_penalty(states[s], problem.references[s], problem.funnel->bound[s],
                             problem.funnel->weight);
    }
  }
  return cost;
}

Eigen::VectorXd cost_gradient(const std::vector<OcpState>& states,
                              const std::vector<Wrench>& inputs, const OcpProblem& problem) {
  const int N = problem.N;
  if (states.size() != static_cast<std::size_t>(N) + 1 ||
      inputs.size() != static_cast<std::size_t>(N)) {
    throw DimensionMismatch("cost_gradient: trajectory lengths do not match the horizon");
  }
  Eigen::VectorXd g = Eigen::VectorXd::Zero(stacked_size(N));
  for (int i = 0; i <= N; ++i) {
    const auto s = static_cast<std::size_t>(i);
    const auto& ref = problem.references[s];
    const Matrix12d& Q = (i < N) ? problem.weights.Q_X : problem.weights.Q_XN;
    const Vector12d e = state_error(states[s], ref);
    g.segment<kNx>(state_offset(i)) = 2.0 * state_error_jacobian(states[s], ref).transpose() * (Q * e);
    if (i < N) {
      g.segment<kNu>(input_offset(i)) = -2.0 * (problem.weights.Q_U * wrench_error(inputs[s], ref));
    }
    if (problem.funnel) {
      const Vec3 d = states[s].position - ref.p_des;
      const double dist = d.norm();
      const double h = dist - problem.funnel->bound[s];
      if (h > 0.0 && dist > 0.0) {
        g.segment<3>(state_offset(i)) += 2.0 * problem.funnel->weight * h * d / dist;
      }
    }
  }
  return g;
}

std::vector<double> tension_margins(const OcpProblem& problem, int stage, const Wrench& u) {
  std::vector<double> out;
  if (!problem.tension) return out;
  const auto w = payload_frame_wrench(u, problem.references[static_cast<std::size_t>(stage)].attitude_des);
  for (const auto& A : problem.tension->blocks) {
    out.push_back(problem.tension->f_max - (A * w).norm());
  }
  return out;
}

std::vector<double> tension_rows(const OcpProblem& problem, int stage, const Wrench& u) {
  std::vector<double> out;
  if (!problem.tension) return out;
  const double f = problem.tension->f_max;
  const auto w = payload_frame_wrench(u, problem.references[static_cast<std::size_t>(stage)].attitude_des);
  for (const auto& A : problem.tension->blocks) {
    out.push_back(((A * w).squaredNorm() - f * f) / (2.0 * f));
  }
  return out;
}

double obstacle_row(const OcpProblem& problem, const OcpState& x) {
  if (!problem.obstacle) return 0.0;
  return problem.obstacle->clearance - (x.position - problem.obstacle->position).norm();
}

OcpProblem build_ocp(const OcpState& x0, const std::vector<ReferencePoint>& window,
                     const OcpConfig& config, double t0) {
  if (config.N < 1) throw ConfigError("build_ocp: horizon must be >= 1");
  if (window.size() != static_cast<std::size_t>(config.N) + 1) {
    throw ConfigError("build_ocp: reference window must hold N + 1 samples");
  }
  OcpProblem p;
  p.x0 = x0;
  p.N = config.N;
  p.dt = config.dt;
  p.references = window;
  p.weights = config.weights;
  p.model = config.model;
  p.obstacle = config.obstacle;
  p.tension = config.tension;
  if (config.funnel) {
    Funnel f;
    f.weight = config.funnel_weight;
    for (int i = 0; i <= config.N; ++i) f.bound.push_back((*config.funnel)(t0 + i * config.dt));
    p.funnel = std::move(f);
  }
  p.validate();
  return p;
}

OcpSolution initial_guess(const OcpProblem& problem) {
  OcpSolution s;
  s.states.push_back(problem.x0);
  for (int i = 0; i < problem.N; ++i) {
    s.inputs.push_back(problem.references[static_cast<std::size_t>(i)].wrench_des);
    s.states.push_back(discretize(s.states.back(), s.inputs.back(), problem.dt, problem.model));
  }
  s.cost = total_cost(s.states, s.inputs, problem);
  return s;
}

}  // namespace cablelift
