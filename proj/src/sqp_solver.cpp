#include "cablelift/sqp_solver.hpp"

#include <algorithm>
#include <cmath>

#include "cablelift/errors.hpp"

namespace cablelift {

namespace {

using Eigen::VectorXd;

struct Iterate {
  std::vector<OcpState> states;
  std::vector<Wrench> inputs;
  double cost = 0.0;
  double violation = 0.0;
};

Eigen::Matrix<double, 3, 6> cable_map(const Eigen::Matrix<double, 3, 6>& block,
                                      const UnitQuaternion& q_ref) {
  Eigen::Matrix<double, 3, 6> C;
  C.leftCols<3>() = block.leftCols<3>() * q_ref.conjugate().toRotationMatrix();
  C.rightCols<3>() = block.rightCols<3>();
  return C;
}

Iterate evaluate(const OcpProblem& problem, std::vector<OcpState> states,
                 std::vector<Wrench> inputs) {
  Iterate it;
  it.states = std::move(states);
  it.inputs = std::move(inputs);
  it.cost = total_cost(it.states, it.inputs, problem);
  it.violation = constraint_violation_l1(problem, it.states, it.inputs);
  return it;
}

double max_defect(const OcpProblem& problem, const Iterate& it) {
  double d = 0.0;
  for (int i = 0; i < problem.N; ++i) {
    const auto s = static_cast<std::size_t>(i);
    const OcpState f = discretize(it.states[s], it.inputs[s], problem.dt, problem.model);
    d = std::max(d, difference(it.states[s + 1], f).lpNorm<Eigen::Infinity>());
  }
  return d;
}

double max_violation(const OcpProblem& problem, const Iterate& it) {
  double v = 0.0;
  for (int i = 0; i < problem.N; ++i) {
    for (double r : tension_rows(problem, i, it.inputs[static_cast<std::size_t>(i)])) {
      v = std::max(v, r);
    }
  }
  if (problem.obstacle) {
    for (int i = 1; i <= problem.N; ++i) {
      v = std::max(v, obstacle_row(problem, it.states[static_cast<std::size_t>(i)]));
    }
  }
  return v;
}

}  // namespace

void SolverConfig::validate() const {
  if (max_sqp_iters < 1 || qp_max_iters < 1) throw ConfigError("solver: iteration limits must be >= 1");
  if (!(kkt_tol > 0.0) || !(qp_tol > 0.0) || !(min_step > 0.0) || !(armijo > 0.0) ||
      !(fd_step > 0.0) || !(merit_penalty > 0.0) || regularization < 0.0) {
    throw ConfigError("solver: tolerances must be positive");
  }
  if (!(backtrack > 0.0 && backtrack < 1.0)) throw ConfigError("solver: backtrack must be in (0, 1)");
}

double constraint_violation_l1(const OcpProblem& problem, const std::vector<OcpState>& states,
                               const std::vector<Wrench>& inputs) {
  double v = 0.0;
  for (int i = 0; i < problem.N; ++i) {
    const auto s = static_cast<std::size_t>(i);
    const OcpState f = discretize(states[s], inputs[s], problem.dt, problem.model);
    v += difference(states[s + 1], f).lpNorm<1>();
    for (double r : tension_rows(problem, i, inputs[s])) v += std::max(0.0, r);
  }
  if (problem.obstacle) {
    for (int i = 1; i <= problem.N; ++i) {
      v += std::max(0.0, obstacle_row(problem, states[static_cast<std::size_t>(i)]));
    }
  }
  return v;
}

OcpQp build_subproblem(const OcpProblem& problem, const std::vector<OcpState>& states,
                       const std::vector<Wrench>& inputs, const SolverConfig& config) {
  const int N = problem.N;
  const double reg = config.regularization;
  OcpQp qp;
  qp.N = N;
  qp.stages.resize(static_cast<std::size_t>(N));
  qp.x_init = difference(states.front(), problem.x0);

  auto add_funnel = [&](Matrix12d& Q, Vector12d& q, const OcpState& x, int i) {
    if (!problem.funnel) return;
    const auto s = static_cast<std::size_t>(i);
    const Vec3 d = x.position - problem.references[s].p_des;
    const double dist = d.norm();
    const double h = dist - problem.funnel->bound[s];
    if (h <= 0.0 || dist <= 0.0) return;
    const Vec3 n = d / dist;
    const double w = problem.funnel->weight;
    Q.block<3, 3>(0, 0) += 2.0 * w * n * n.transpose();
    q.head<3>() += 2.0 * w * h * n;
  };

  for (int i = 0; i < N; ++i) {
    const auto s = static_cast<std::size_t>(i);
    const auto& ref = problem.references[s];
    OcpQpStage& st = qp.stages[s];
    const Matrix12d J = state_error_jacobian(states[s], ref);
    const Matrix12d QJ = problem.weights.Q_X * J;
    st.Q = 2.0 * J.transpose() * QJ + reg * Matrix12d::Identity();
    st.Q = 0.5 * (st.Q + st.Q.transpose()).eval();
    st.q = 2.0 * QJ.transpose() * state_error(states[s], ref);
    add_funnel(st.Q, st.q, states[s], i);
    st.R = 2.0 * problem.weights.Q_U + reg * Matrix6d::Identity();
    st.r = -2.0 * problem.weights.Q_U * wrench_error(inputs[s], ref);
    const Linearization lin =
        linearize_dynamics(states[s], inputs[s], states[s + 1], problem.dt, problem.model,
                           config.fd_step);
    st.A = lin.A;
    st.B = lin.B;
    st.b = lin.b;

    if (problem.tension) {
      const double f = problem.tension->f_max;
      const Vector6d u = inputs[s].vector();
      for (const auto& block : problem.tension->blocks) {
        const Eigen::Matrix<double, 3, 6> C = cable_map(block, ref.attitude_des);
        const Matrix6d G = C.transpose() * C;
        StageRow row;
        row.stage = i;
        Matrix18d W = Matrix18d::Zero();
        W.bottomRightCorner<kNu, kNu>() = G / f;
        row.W = W;
        row.a.tail<kNu>() = G * u / f;
        row.b0 = (u.dot(G * u) - f * f) / (2.0 * f);
        qp.rows.push_back(row);
      }
    }
  }

  const auto& refN = problem.references.back();
  const Matrix12d JN = state_error_jacobian(states.back(), refN);
  const Matrix12d QJN = problem.weights.Q_XN * JN;
  qp.QN = 2.0 * JN.transpose() * QJN + reg * Matrix12d::Identity();
  qp.QN = 0.5 * (qp.QN + qp.QN.transpose()).eval();
  qp.qN = 2.0 * QJN.transpose() * state_error(states.back(), refN);
  add_funnel(qp.QN, qp.qN, states.back(), N);

  if (problem.obstacle) {
    for (int i = 1; i <= N; ++i) {
      const Vec3 d = states[static_cast<std::size_t>(i)].position - problem.obstacle->position;
      const double dist = d.norm();
      const Vec3 n = dist > 1e-12 ? Vec3(d / dist) : Vec3::UnitX();
      StageRow row;
      row.stage = i;
      row.a.head<3>() = -n;
      row.b0 = problem.obstacle->clearance - dist;
      qp.rows.push_back(row);
    }
  }
  return qp;
}

OcpSolution solve(const OcpProblem& problem, const std::optional<WarmStart>& warm,
                  const SolverConfig& config, SolveTrace* trace) {
  problem.validate();
  config.validate();
  const int N = problem.N;

  std::vector<OcpState> states;
  std::vector<Wrench> inputs;
  if (warm) {
    if (warm->states.size() != static_cast<std::size_t>(N) + 1 ||
        warm->inputs.size() != static_cast<std::size_t>(N)) {
      throw DimensionMismatch("solve: warm start does not match the horizon");
    }
    states = warm->states;
    inputs = warm->inputs;
    states.front() = problem.x0;
  } else {
    const OcpSolution guess = initial_guess(problem);
    states = guess.states;
    inputs = guess.inputs;
  }
  Iterate cur = evaluate(problem, std::move(states), std::move(inputs));

  QpSettings qp_settings;
  qp_settings.max_iters = config.qp_max_iters;
  qp_settings.tol = config.qp_tol;

  OcpSolution out;
  out.status = SolveStatus::max_iter;
  double nu = config.merit_penalty;
  if (trace) trace->merit.push_back(cur.cost + nu * cur.violation);

  for (int iter = 0; iter < config.max_sqp_iters; ++iter) {
    const OcpQp qp = build_subproblem(problem, cur.states, cur.inputs, config);
    OcpBackend backend(qp);
    const QpResult res = solve_qp(backend, qp_settings);
    out.iterations = iter + 1;
    if (trace) trace->qp_iterations.push_back(res.iterations);

    if (res.status == QpStatus::infeasible) {
      out.status = SolveStatus::infeasible;
      break;
    }

    // KKT residual of the NLP at the current iterate with the QP multipliers.
    const VectorXd zero = VectorXd::Zero(backend.num_vars());
    const VectorXd c0 = backend.ineq_values(zero);
    const double stationarity =
        backend.grad_lagrangian(zero, res.y, res.lambda).lpNorm<Eigen::Infinity>();
    const double primal = std::max(backend.eq_residual(zero).lpNorm<Eigen::Infinity>(),
                                   c0.size() ? c0.cwiseMax(0.0).maxCoeff() : 0.0);
    const double comp =
        c0.size() ? res.lambda.cwiseProduct(c0).cwiseAbs().maxCoeff() : 0.0;
    out.kkt_residual = std::max({stationarity, primal, comp});
    if (trace) {
      trace->kkt.push_back(out.kkt_residual);
      trace->cost.push_back(cur.cost);
    }
    if (out.kkt_residual <= config.kkt_tol) {
      out.status = SolveStatus::converged;
      break;
    }

    double mult = res.y.size() ? res.y.lpNorm<Eigen::Infinity>() : 0.0;
    if (res.lambda.size()) mult = std::max(mult, res.lambda.lpNorm<Eigen::Infinity>());
    nu = std::max(nu, 1.1 * mult);
    const double merit0 = cur.cost + nu * cur.violation;

    // Directional derivative of the merit along the QP step.
    double slope = -nu * cur.violation;
    for (int i = 0; i < N; ++i) {
      const auto& st = qp.stages[static_cast<std::size_t>(i)];
      slope += st.q.dot(res.z.segment<kNx>(state_offset(i))) +
               st.r.dot(res.z.segment<kNu>(input_offset(i)));
    }
    slope += qp.qN.dot(res.z.segment<kNx>(state_offset(N)));
    slope = std::min(slope, 0.0);

    bool accepted = false;
    for (double alpha = 1.0; alpha >= config.min_step; alpha *= config.backtrack) {
      std::vector<OcpState> xs(cur.states.size());
      std::vector<Wrench> us(cur.inputs.size());
      for (int i = 0; i <= N; ++i) {
        const auto s = static_cast<std::size_t>(i);
        xs[s] = retract(cur.states[s], alpha * Vector12d(res.z.segment<kNx>(state_offset(i))));
        if (i < N) {
          us[s] = Wrench::from_vector(cur.inputs[s].vector() +
                                      alpha * Vector6d(res.z.segment<kNu>(input_offset(i))));
        }
      }
      xs.front() = problem.x0;
      Iterate cand = evaluate(problem, std::move(xs), std::move(us));
      const double merit = cand.cost + nu * cand.violation;
      // Near the solution the decrease falls below rounding of merit0.
      const double slack = kMeritRoundoff * std::max(1.0, std::abs(merit0));
      if (std::isfinite(merit) && merit <= merit0 + config.armijo * alpha * slope + slack &&
          merit <= merit0 + slack) {
        cur = std::move(cand);
        accepted = true;
        if (trace) {
          trace->merit.push_back(merit);
          trace->merit_before.push_back(merit0);
          trace->step.push_back(alpha);
        }
        break;
      }
    }
    if (!accepted) break;
  }

  out.states = cur.states;
  out.inputs = cur.inputs;
  out.cost = cur.cost;
  out.max_defect = max_defect(problem, cur);
  out.max_violation = max_violation(problem, cur);
  return out;
}

WarmStart shift_warm_start(const OcpSolution& previous, int elapsed, int new_horizon) {
  if (elapsed < 1) throw DomainError("shift_warm_start: elapsed must be >= 1");
  if (new_horizon < 1) throw DomainError("shift_warm_start: horizon must be >= 1");
  if (previous.states.empty() || previous.inputs.empty()) {
    throw DimensionMismatch("shift_warm_start: empty previous solution");
  }
  WarmStart w;
  const int n_states = static_cast<int>(previous.states.size());
  const int n_inputs = static_cast<int>(previous.inputs.size());
  for (int i = 0; i <= new_horizon; ++i) {
    w.states.push_back(previous.states[static_cast<std::size_t>(std::min(elapsed + i, n_states - 1))]);
  }
  for (int i = 0; i < new_horizon; ++i) {
    w.inputs.push_back(previous.inputs[static_cast<std::size_t>(std::min(elapsed + i, n_inputs - 1))]);
  }
  return w;
}

}  // namespace cablelift
