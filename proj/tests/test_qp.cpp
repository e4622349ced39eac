#include <cmath>

#include "cablelift/qp.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cablelift;
using namespace testing_util;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, double scale) {
  MatrixXd M(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) M(i, j) = uniform(-scale, scale);
  return M;
}

OcpQp random_ocp_qp(int N, bool with_rows) {
  OcpQp qp;
  qp.N = N;
  for (int i = 0; i < N; ++i) {
    OcpQpStage st;
    const MatrixXd L = random_matrix(18, 18, 1.0);
    const Matrix18d H = L * L.transpose() + 0.5 * Matrix18d::Identity();
    st.Q = H.topLeftCorner<12, 12>();
    st.S = H.bottomLeftCorner<6, 12>();
    st.R = H.bottomRightCorner<6, 6>();
    st.q = random_matrix(12, 1, 1.0);
    st.r = random_matrix(6, 1, 1.0);
    st.A = Matrix12d::Identity() + random_matrix(12, 12, 0.05);
    st.B = random_matrix(12, 6, 0.1);
    st.b = random_matrix(12, 1, 0.1);
    qp.stages.push_back(st);
  }
  const MatrixXd L = random_matrix(12, 12, 1.0);
  qp.QN = L * L.transpose() + Matrix12d::Identity();
  qp.qN = random_matrix(12, 1, 1.0);
  qp.x_init = random_matrix(12, 1, 0.5);
  if (with_rows) {
    for (int i = 1; i <= N; ++i) {
      for (int k = 0; k < 2; ++k) {
        StageRow row;
        row.stage = i;
        row.a = random_matrix(18, 1, 1.0);
        if (i == N) row.a.tail<6>().setZero();
        row.b0 = -uniform(0.05, 0.3);
        qp.rows.push_back(row);
      }
    }
  }
  return qp;
}

DenseQp to_dense(const OcpQp& qp) {
  const int N = qp.N;
  const Eigen::Index n = stacked_size(N);
  DenseQp d;
  d.H = MatrixXd::Zero(n, n);
  d.g = VectorXd::Zero(n);
  d.Aeq = MatrixXd::Zero(12 * (N + 1), n);
  d.beq = VectorXd::Zero(12 * (N + 1));
  d.Aeq.block(0, 0, 12, 12) = MatrixXd::Identity(12, 12);
  d.beq.head(12) = qp.x_init;
  for (int i = 0; i < N; ++i) {
    const auto& st = qp.stages[static_cast<std::size_t>(i)];
    const Eigen::Index o = state_offset(i);
    d.H.block(o, o, 12, 12) = st.Q;
    d.H.block(o + 12, o, 6, 12) = st.S;
    d.H.block(o, o + 12, 12, 6) = st.S.transpose();
    d.H.block(o + 12, o + 12, 6, 6) = st.R;
    d.g.segment(o, 12) = st.q;
    d.g.segment(o + 12, 6) = st.r;
    const Eigen::Index r = 12 * (i + 1);
    d.Aeq.block(r, o, 12, 12) = st.A;
    d.Aeq.block(r, o + 12, 12, 6) = st.B;
    d.Aeq.block(r, state_offset(i + 1), 12, 12) = -MatrixXd::Identity(12, 12);
    d.beq.segment(r, 12) = -st.b;
  }
  const Eigen::Index o = state_offset(N);
  d.H.block(o, o, 12, 12) = qp.QN;
  d.g.segment(o, 12) = qp.qN;
  d.C = MatrixXd::Zero(static_cast<Eigen::Index>(qp.rows.size()), n);
  d.d = VectorXd::Zero(static_cast<Eigen::Index>(qp.rows.size()));
  for (std::size_t j = 0; j < qp.rows.size(); ++j) {
    const auto& row = qp.rows[j];
    const auto jj = static_cast<Eigen::Index>(j);
    const Eigen::Index width = row.stage == N ? 12 : 18;
    d.C.block(jj, state_offset(row.stage), 1, width) = row.a.head(width).transpose();
    d.d(jj) = -row.b0;
  }
  return d;
}

}  // namespace

TEST_CASE("one-variable QP") {
  DenseQp qp;
  qp.H = MatrixXd::Identity(1, 1);
  qp.g = VectorXd::Constant(1, -1.0);
  qp.Aeq.resize(0, 1);
  qp.beq.resize(0);
  qp.C.resize(0, 1);
  qp.d.resize(0);
  const QpResult r = solve_dense_qp(qp);
  CHECK(r.status == QpStatus::solved);
  CHECK(std::abs(r.z(0) - 1.0) < 1e-10);
}

TEST_CASE("equality-constrained QP matches the hand-solved KKT system") {
  // min x^2 + y^2 - 2x  s.t. x + y = 1. Stationarity: 2x - 2 + y_m = 0,
  // 2y + y_m = 0, so x - y = 1, giving x = 1, y = 0.
  DenseQp qp;
  qp.H = 2.0 * MatrixXd::Identity(2, 2);
  qp.g = VectorXd(2);
  qp.g << -2.0, 0.0;
  qp.Aeq = MatrixXd::Ones(1, 2);
  qp.beq = VectorXd::Ones(1);
  qp.C.resize(0, 2);
  qp.d.resize(0);
  const QpResult r = solve_dense_qp(qp);
  CHECK(r.status == QpStatus::solved);
  CHECK(std::abs(r.z(0) - 1.0) < 1e-10);
  CHECK(std::abs(r.z(1) - 0.0) < 1e-10);

  // A second, less symmetric case: min 1/2(3x^2 + y^2) + x - y  s.t. x - 2y = 0.5.
  qp.H << 3, 0, 0, 1;
  qp.g << 1, -1;
  qp.Aeq << 1, -2;
  qp.beq << 0.5;
  Eigen::Matrix3d K;
  K << 3, 0, 1, 0, 1, -2, 1, -2, 0;
  const Eigen::Vector3d sol = K.fullPivLu().solve(Eigen::Vector3d(-1, 1, 0.5));
  const QpResult r2 = solve_dense_qp(qp);
  CHECK((r2.z - sol.head<2>()).norm() < 1e-10);
}

TEST_CASE("active bound has a non-negative multiplier") {
  // min 1/2 x^2 - 2x  s.t. x <= 1: unconstrained optimum 2, constrained 1.
  DenseQp qp;
  qp.H = MatrixXd::Identity(1, 1);
  qp.g = VectorXd::Constant(1, -2.0);
  qp.Aeq.resize(0, 1);
  qp.beq.resize(0);
  qp.C = MatrixXd::Ones(1, 1);
  qp.d = VectorXd::Ones(1);
  const QpResult r = solve_dense_qp(qp);
  CHECK(r.status == QpStatus::solved);
  CHECK(std::abs(r.z(0) - 1.0) < 1e-8);
  CHECK(r.lambda(0) >= 0.0);
  CHECK(std::abs(r.lambda(0) - 1.0) < 1e-6);

  // Inactive bound: multiplier vanishes.
  qp.d(0) = 5.0;
  const QpResult r2 = solve_dense_qp(qp);
  CHECK(std::abs(r2.z(0) - 2.0) < 1e-8);
  CHECK(r2.lambda(0) >= 0.0);
  CHECK(r2.lambda(0) < 1e-6);
}

TEST_CASE("inconsistent inequalities are reported infeasible") {
  DenseQp qp;
  qp.H = MatrixXd::Identity(1, 1);
  qp.g = VectorXd::Zero(1);
  qp.Aeq.resize(0, 1);
  qp.beq.resize(0);
  qp.C = MatrixXd(2, 1);
  qp.C << 1, -1;
  qp.d = VectorXd(2);
  qp.d << -1, -1;  // x <= -1 and x >= 1
  CHECK(solve_dense_qp(qp).status == QpStatus::infeasible);
}

TEST_CASE("Riccati backend agrees with the dense backend") {
  for (int trial = 0; trial < 6; ++trial) {
    const OcpQp qp = random_ocp_qp(2 + trial, trial % 2 == 1);
    const QpResult a = solve_ocp_qp(qp);
    const QpResult b = solve_dense_qp(to_dense(qp));
    REQUIRE(a.status == QpStatus::solved);
    REQUIRE(b.status == QpStatus::solved);
    CHECK((a.z - b.z).norm() <= 1e-7 * std::max(1.0, b.z.norm()));
    // KKT residuals of the structured solution, evaluated independently.
    const DenseQp d = to_dense(qp);
    CHECK((d.Aeq * a.z - d.beq).norm() < 1e-8);
    if (d.C.rows() > 0) {
      CHECK((d.C * a.z - d.d).maxCoeff() < 1e-8);
      CHECK(a.lambda.minCoeff() >= 0.0);
    }
  }
}

TEST_CASE("unconstrained OCP QP solution satisfies stationarity exactly") {
  const OcpQp qp = random_ocp_qp(5, false);
  const QpResult r = solve_ocp_qp(qp);
  const DenseQp d = to_dense(qp);
  // H z + g + Aeq' nu = 0 for some nu: project the residual off range(Aeq').
  const VectorXd grad = d.H * r.z + d.g;
  const VectorXd nu = d.Aeq.transpose().colPivHouseholderQr().solve(-grad);
  CHECK((d.H * r.z + d.g + d.Aeq.transpose() * nu).norm() < 1e-8);
}
