#include "cablelift/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cablelift/errors.hpp"

namespace cablelift {

namespace {

using Eigen::Index;
using Eigen::VectorXd;

double inf_norm(const VectorXd& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

/// Largest alpha in (0, 1] keeping v + alpha dv >= 0.
double max_step(const VectorXd& v, const VectorXd& dv) {
  double alpha = 1.0;
  for (Index j = 0; j < v.size(); ++j) {
    if (dv[j] < 0.0) alpha = std::min(alpha, -v[j] / dv[j]);
  }
  return alpha;
}

}  // namespace

QpResult solve_qp(QpBackend& backend, const QpSettings& settings) {
  const Index n = backend.num_vars();
  const Index p = backend.num_eq();
  const Index m = backend.num_ineq();

  QpResult res;
  res.z = VectorXd::Zero(n);
  res.y = VectorXd::Zero(p);
  res.lambda = VectorXd::Ones(m);
  res.s = (-backend.ineq_values(res.z)).cwiseMax(1.0);

  const double g_scale = 1.0 + inf_norm(backend.grad_lagrangian(res.z, res.y, VectorXd::Zero(m)));
  VectorXd dz, dy;

  for (int it = 0; it <= settings.max_iters; ++it) {
    const VectorXd c = backend.ineq_values(res.z);
    const VectorXd r_d = backend.grad_lagrangian(res.z, res.y, res.lambda);
    const VectorXd r_p = backend.eq_residual(res.z);
    const VectorXd r_i = c + res.s;
    const double mu = m > 0 ? res.s.dot(res.lambda) / static_cast<double>(m) : 0.0;

    res.iterations = it;
    res.dual_residual = inf_norm(r_d);
    res.primal_residual = std::max(inf_norm(r_p), m > 0 ? c.cwiseMax(0.0).maxCoeff() : 0.0);
    res.mu = mu;

    if (res.dual_residual <= settings.tol * g_scale && inf_norm(r_p) <= settings.tol &&
        inf_norm(r_i) <= settings.tol && mu <= settings.tol) {
      res.status = QpStatus::solved;
      return res;
    }
    if (m > 0 && inf_norm(res.lambda) > settings.infeasible_multiplier &&
        std::max(inf_norm(r_p), inf_norm(r_i)) > settings.tol) {
      res.status = QpStatus::infeasible;
      return res;
    }
    if (it == settings.max_iters) break;

    const VectorXd sigma_w = m > 0 ? VectorXd(res.lambda.cwiseQuotient(res.s)) : VectorXd();
    backend.factor(res.z, res.lambda, sigma_w);

    // Newton step for a given complementarity residual r_c = s.lambda - target.
    VectorXd ds, dl;
    auto newton = [&](const VectorXd& r_c) {
      VectorXd rhs_d = r_d;
      VectorXd tmp;
      if (m > 0) {
        tmp = (res.lambda.cwiseProduct(r_i) - r_c).cwiseQuotient(res.s);
        rhs_d += backend.ineq_jac_tmul(res.z, tmp);
      }
      backend.solve(rhs_d, r_p, dz, dy);
      if (m > 0) {
        const VectorXd Jdz = backend.ineq_jac_mul(res.z, dz);
        ds = -r_i - Jdz;
        dl = sigma_w.cwiseProduct(Jdz) + tmp;
      }
    };

    double alpha = 1.0;
    if (m > 0) {
      newton(res.s.cwiseProduct(res.lambda));
      const double a_aff = std::min(max_step(res.s, ds), max_step(res.lambda, dl));
      const double mu_aff =
          (res.s + a_aff * ds).dot(res.lambda + a_aff * dl) / static_cast<double>(m);
      const double centering = std::pow(std::max(mu_aff, 0.0) / std::max(mu, 1e-300), 3.0);
      const VectorXd r_c = res.s.cwiseProduct(res.lambda) + ds.cwiseProduct(dl) -
                           VectorXd::Constant(m, std::min(centering, 1.0) * mu);
      newton(r_c);
      alpha = std::min(1.0, settings.tau * std::min(max_step(res.s, ds), max_step(res.lambda, dl)));
    } else {
      newton(VectorXd());
    }

    res.z += alpha * dz;
    res.y += alpha * dy;
    if (m > 0) {
      res.s += alpha * ds;
      res.lambda += alpha * dl;
    }
  }

  res.status = res.primal_residual > 1e-6 ? QpStatus::infeasible : QpStatus::max_iter;
  return res;
}

// ---------------------------------------------------------------------------
// Dense backend

DenseBackend::DenseBackend(const DenseQp& qp) : qp_(qp) {
  const Index n = qp_.H.rows();
  if (qp_.H.cols() != n || qp_.g.size() != n) throw DimensionMismatch("dense qp: H/g sizes");
  if (qp_.Aeq.size() == 0) qp_.Aeq.resize(0, n);
  if (qp_.C.size() == 0) qp_.C.resize(0, n);
  if (qp_.Aeq.cols() != n || qp_.Aeq.rows() != qp_.beq.size()) {
    throw DimensionMismatch("dense qp: equality sizes");
  }
  if (qp_.C.cols() != n || qp_.C.rows() != qp_.d.size()) {
    throw DimensionMismatch("dense qp: inequality sizes");
  }
}

VectorXd DenseBackend::ineq_values(const VectorXd& z) const { return qp_.C * z - qp_.d; }

VectorXd DenseBackend::ineq_jac_mul(const VectorXd&, const VectorXd& v) const { return qp_.C * v; }

VectorXd DenseBackend::ineq_jac_tmul(const VectorXd&, const VectorXd& w) const {
  return qp_.C.transpose() * w;
}

VectorXd DenseBackend::eq_residual(const VectorXd& z) const { return qp_.Aeq * z - qp_.beq; }

VectorXd DenseBackend::grad_lagrangian(const VectorXd& z, const VectorXd& y,
                                       const VectorXd& lambda) const {
  return qp_.H * z + qp_.g + qp_.Aeq.transpose() * y + qp_.C.transpose() * lambda;
}

void DenseBackend::factor(const VectorXd&, const VectorXd&, const VectorXd& sigma) {
  const Index n = num_vars(), p = num_eq();
  Eigen::MatrixXd Ht = qp_.H;
  if (num_ineq() > 0) Ht += qp_.C.transpose() * sigma.asDiagonal() * qp_.C;
  for (double reg : {0.0, 1e-10, 1e-8, 1e-6, 1e-4}) {
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + p, n + p);
    K.topLeftCorner(n, n) = Ht + reg * Eigen::MatrixXd::Identity(n, n);
    K.topRightCorner(n, p) = qp_.Aeq.transpose();
    K.bottomLeftCorner(p, n) = qp_.Aeq;
    K.bottomRightCorner(p, p) = -reg * Eigen::MatrixXd::Identity(p, p);
    Eigen::FullPivLU<Eigen::MatrixXd> check(K);
    if (check.isInvertible()) {
      lu_.compute(K);
      return;
    }
  }
  throw QpNumericalFailure("dense qp: KKT matrix singular after regularization");
}

void DenseBackend::solve(const VectorXd& rhs_d, const VectorXd& rhs_p, VectorXd& dz,
                         VectorXd& dy) const {
  const Index n = num_vars(), p = num_eq();
  VectorXd rhs(n + p);
  rhs << -rhs_d, -rhs_p;
  const VectorXd sol = lu_.solve(rhs);
  dz = sol.head(n);
  dy = sol.tail(p);
}

QpResult solve_dense_qp(const DenseQp& qp, const QpSettings& settings) {
  DenseBackend backend(qp);
  return solve_qp(backend, settings);
}

// ---------------------------------------------------------------------------
// Riccati backend

OcpBackend::OcpBackend(const OcpQp& qp) : qp_(qp) {
  if (qp_.N < 1 || qp_.stages.size() != static_cast<std::size_t>(qp_.N)) {
    throw DimensionMismatch("ocp qp: stage count must equal N >= 1");
  }
  for (const auto& row : qp_.rows) {
    if (row.stage < 0 || row.stage > qp_.N) throw DimensionMismatch("ocp qp: row stage index");
  }
}

Vector18d OcpBackend::stage_vector(const VectorXd& z, int stage) const {
  Vector18d w = Vector18d::Zero();
  if (stage < qp_.N) {
    w = z.segment<kNx + kNu>(state_offset(stage));
  } else {
    w.head<kNx>() = z.segment<kNx>(state_offset(stage));
  }
  return w;
}

Vector18d OcpBackend::row_gradient(const StageRow& row, const VectorXd& z) const {
  Vector18d g = row.a;
  if (row.W) g += *row.W * stage_vector(z, row.stage);
  if (row.stage == qp_.N) g.tail<kNu>().setZero();
  return g;
}

VectorXd OcpBackend::ineq_values(const VectorXd& z) const {
  VectorXd c(num_ineq());
  for (std::size_t j = 0; j < qp_.rows.size(); ++j) {
    const StageRow& row = qp_.rows[j];
    const Vector18d w = stage_vector(z, row.stage);
    double v = row.a.dot(w) + row.b0;
    if (row.W) v += 0.5 * w.dot(*row.W * w);
    c[static_cast<Index>(j)] = v;
  }
  return c;
}

VectorXd OcpBackend::ineq_jac_mul(const VectorXd& z, const VectorXd& v) const {
  VectorXd out(num_ineq());
  for (std::size_t j = 0; j < qp_.rows.size(); ++j) {
    const StageRow& row = qp_.rows[j];
    out[static_cast<Index>(j)] = row_gradient(row, z).dot(stage_vector(v, row.stage));
  }
  return out;
}

VectorXd OcpBackend::ineq_jac_tmul(const VectorXd& z, const VectorXd& w) const {
  VectorXd out = VectorXd::Zero(num_vars());
  for (std::size_t j = 0; j < qp_.rows.size(); ++j) {
    const StageRow& row = qp_.rows[j];
    const Vector18d g = w[static_cast<Index>(j)] * row_gradient(row, z);
    if (row.stage < qp_.N) {
      out.segment<kNx + kNu>(state_offset(row.stage)) += g;
    } else {
      out.segment<kNx>(state_offset(row.stage)) += g.head<kNx>();
    }
  }
  return out;
}

VectorXd OcpBackend::eq_residual(const VectorXd& z) const {
  VectorXd r(num_eq());
  r.segment<kNx>(0) = qp_.x_init - z.segment<kNx>(state_offset(0));
  for (int i = 0; i < qp_.N; ++i) {
    const auto& st = qp_.stages[static_cast<std::size_t>(i)];
    r.segment<kNx>(kNx * (i + 1)) = st.A * z.segment<kNx>(state_offset(i)) +
                                    st.B * z.segment<kNu>(input_offset(i)) + st.b -
                                    z.segment<kNx>(state_offset(i + 1));
  }
  return r;
}

VectorXd OcpBackend::grad_lagrangian(const VectorXd& z, const VectorXd& y,
                                     const VectorXd& lambda) const {
  VectorXd g(num_vars());
  for (int i = 0; i < qp_.N; ++i) {
    const auto& st = qp_.stages[static_cast<std::size_t>(i)];
    const auto x = z.segment<kNx>(state_offset(i));
    const auto u = z.segment<kNu>(input_offset(i));
    const auto pi = y.segment<kNx>(kNx * i);
    const auto pi_next = y.segment<kNx>(kNx * (i + 1));
    g.segment<kNx>(state_offset(i)) =
        st.Q * x + st.S.transpose() * u + st.q - pi + st.A.transpose() * pi_next;
    g.segment<kNu>(input_offset(i)) = st.R * u + st.S * x + st.r + st.B.transpose() * pi_next;
  }
  g.segment<kNx>(state_offset(qp_.N)) =
      qp_.QN * z.segment<kNx>(state_offset(qp_.N)) + qp_.qN - y.segment<kNx>(kNx * qp_.N);
  if (lambda.size() > 0) g += ineq_jac_tmul(z, lambda);
  return g;
}

void OcpBackend::factor(const VectorXd& z, const VectorXd& lambda, const VectorXd& sigma) {
  const int N = qp_.N;
  std::vector<Matrix18d> extra(static_cast<std::size_t>(N) + 1, Matrix18d::Zero());
  for (std::size_t j = 0; j < qp_.rows.size(); ++j) {
    const StageRow& row = qp_.rows[j];
    const auto jj = static_cast<Index>(j);
    Matrix18d& M = extra[static_cast<std::size_t>(row.stage)];
    if (row.W) M += lambda[jj] * *row.W;
    const Vector18d g = row_gradient(row, z);
    M += sigma[jj] * g * g.transpose();
  }

  P_.assign(static_cast<std::size_t>(N) + 1, Matrix12d::Zero());
  K_.assign(static_cast<std::size_t>(N), Eigen::Matrix<double, kNu, kNx>::Zero());
  Qux_.assign(static_cast<std::size_t>(N), Eigen::Matrix<double, kNu, kNx>::Zero());
  Quu_.assign(static_cast<std::size_t>(N), Eigen::LLT<Matrix6d>());

  P_.back() = qp_.QN + extra.back().topLeftCorner<kNx, kNx>();
  for (int i = N - 1; i >= 0; --i) {
    const auto s = static_cast<std::size_t>(i);
    const auto& st = qp_.stages[s];
    const Matrix18d& M = extra[s];
    const Matrix12d& Pn = P_[s + 1];
    const Matrix12d PA = Pn * st.A;
    const Matrix12d Qxx = st.Q + M.topLeftCorner<kNx, kNx>() + st.A.transpose() * PA;
    Matrix6d Quu = st.R + M.bottomRightCorner<kNu, kNu>() + st.B.transpose() * Pn * st.B;
    Quu = 0.5 * (Quu + Quu.transpose()).eval();
    const Eigen::Matrix<double, kNu, kNx> Qux =
        st.S + M.bottomLeftCorner<kNu, kNx>() + st.B.transpose() * PA;

    bool ok = false;
    const double scale = 1.0 + Quu.diagonal().cwiseAbs().maxCoeff();
    for (double reg : {0.0, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4}) {
      Quu_[s].compute(Quu + reg * scale * Matrix6d::Identity());
      if (Quu_[s].info() == Eigen::Success) {
        ok = true;
        break;
      }
    }
    if (!ok) throw QpNumericalFailure("ocp qp: input Hessian not positive definite");

    K_[s] = -Quu_[s].solve(Qux);
    Qux_[s] = Qux;
    Matrix12d P = Qxx + Qux.transpose() * K_[s];
    P_[s] = 0.5 * (P + P.transpose());
  }
}

void OcpBackend::solve(const VectorXd& rhs_d, const VectorXd& rhs_p, VectorXd& dz,
                       VectorXd& dy) const {
  const int N = qp_.N;
  std::vector<Vector12d> p(static_cast<std::size_t>(N) + 1);
  std::vector<Vector6d> k(static_cast<std::size_t>(N));
  p.back() = rhs_d.segment<kNx>(state_offset(N));
  for (int i = N - 1; i >= 0; --i) {
    const auto s = static_cast<std::size_t>(i);
    const auto& st = qp_.stages[s];
    const Vector12d v = P_[s + 1] * rhs_p.segment<kNx>(kNx * (i + 1)) + p[s + 1];
    const Vector12d qx = rhs_d.segment<kNx>(state_offset(i)) + st.A.transpose() * v;
    const Vector6d qu = rhs_d.segment<kNu>(input_offset(i)) + st.B.transpose() * v;
    k[s] = -Quu_[s].solve(qu);
    p[s] = qx + Qux_[s].transpose() * k[s];
  }

  dz.resize(num_vars());
  dy.resize(num_eq());
  Vector12d dx = rhs_p.segment<kNx>(0);
  for (int i = 0; i < N; ++i) {
    const auto s = static_cast<std::size_t>(i);
    const auto& st = qp_.stages[s];
    const Vector6d du = K_[s] * dx + k[s];
    dz.segment<kNx>(state_offset(i)) = dx;
    dz.segment<kNu>(input_offset(i)) = du;
    dy.segment<kNx>(kNx * i) = P_[s] * dx + p[s];
    dx = st.A * dx + st.B * du + rhs_p.segment<kNx>(kNx * (i + 1));
  }
  dz.segment<kNx>(state_offset(N)) = dx;
  dy.segment<kNx>(kNx * N) = P_.back() * dx + p.back();
}

QpResult solve_ocp_qp(const OcpQp& qp, const QpSettings& settings) {
  OcpBackend backend(qp);
  return solve_qp(backend, settings);
}

}  // namespace cablelift
