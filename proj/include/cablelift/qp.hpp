#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cablelift/payload_ocp.hpp"

namespace cablelift {

struct QpSettings {
  int max_iters = 100;
  double tol = 1e-9;
  double tau = 0.995;                // fraction to the boundary
  double infeasible_multiplier = 1e9;
};

enum class QpStatus { solved, max_iter, infeasible };

struct QpResult {
  Eigen::VectorXd z, y, lambda, s;
  QpStatus status = QpStatus::max_iter;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double mu = 0.0;
};

/// Problem-specific linear algebra for the interior point method. The QP is
///   min 1/2 z'Hz + g'z  s.t.  e(z) = 0 (affine),  c_j(z) <= 0 (convex quadratic).
class QpBackend {
 public:
  virtual ~QpBackend() = default;
  virtual Eigen::Index num_vars() const = 0;
  virtual Eigen::Index num_eq() const = 0;
  virtual Eigen::Index num_ineq() const = 0;

  virtual Eigen::VectorXd ineq_values(const Eigen::VectorXd& z) const = 0;
  /// Constraint Jacobian at z times v, and its transpose times w.
  virtual Eigen::VectorXd ineq_jac_mul(const Eigen::VectorXd& z, const Eigen::VectorXd& v) const = 0;
  virtual Eigen::VectorXd ineq_jac_tmul(const Eigen::VectorXd& z, const Eigen::VectorXd& w) const = 0;
  virtual Eigen::VectorXd eq_residual(const Eigen::VectorXd& z) const = 0;
  /// Hz + g + E'y + Jc(z)'lambda.
  virtual Eigen::VectorXd grad_lagrangian(const Eigen::VectorXd& z, const Eigen::VectorXd& y,
                                          const Eigen::VectorXd& lambda) const = 0;

  /// Prepares to solve with H + sum lambda_j W_j + Jc' diag(sigma) Jc.
  virtual void factor(const Eigen::VectorXd& z, const Eigen::VectorXd& lambda,
                      const Eigen::VectorXd& sigma) = 0;
  /// Solves [Ht E'; E 0] [dz; dy] = -[rhs_d; rhs_p].
  virtual void solve(const Eigen::VectorXd& rhs_d, const Eigen::VectorXd& rhs_p,
                     Eigen::VectorXd& dz, Eigen::VectorXd& dy) const = 0;
};

/// Mehrotra predictor-corrector primal-dual interior point method.
QpResult solve_qp(QpBackend& backend, const QpSettings& settings = {});

/// min 1/2 z'Hz + g'z  s.t.  Aeq z = beq,  C z <= d.
struct DenseQp {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  Eigen::MatrixXd Aeq;
  Eigen::VectorXd beq;
  Eigen::MatrixXd C;
  Eigen::VectorXd d;
};

class DenseBackend final : public QpBackend {
 public:
  explicit DenseBackend(const DenseQp& qp);

  Eigen::Index num_vars() const override { return qp_.H.rows(); }
  Eigen::Index num_eq() const override { return qp_.Aeq.rows(); }
  Eigen::Index num_ineq() const override { return qp_.C.rows(); }
  Eigen::VectorXd ineq_values(const Eigen::VectorXd& z) const override;
  Eigen::VectorXd ineq_jac_mul(const Eigen::VectorXd& z, const Eigen::VectorXd& v) const override;
  Eigen::VectorXd ineq_jac_tmul(const Eigen::VectorXd& z, const Eigen::VectorXd& w) const override;
  Eigen::VectorXd eq_residual(const Eigen::VectorXd& z) const override;
  Eigen::VectorXd grad_lagrangian(const Eigen::VectorXd& z, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& lambda) const override;
  void factor(const Eigen::VectorXd& z, const Eigen::VectorXd& lambda,
              const Eigen::VectorXd& sigma) override;
  void solve(const Eigen::VectorXd& rhs_d, const Eigen::VectorXd& rhs_p, Eigen::VectorXd& dz,
             Eigen::VectorXd& dy) const override;

 private:
  DenseQp qp_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

QpResult solve_dense_qp(const DenseQp& qp, const QpSettings& settings = {});

using Vector18d = Eigen::Matrix<double, kNx + kNu, 1>;
using Matrix18d = Eigen::Matrix<double, kNx + kNu, kNx + kNu>;

struct OcpQpStage {
  Matrix12d Q = Matrix12d::Zero();
  Matrix6d R = Matrix6d::Zero();
  Eigen::Matrix<double, kNu, kNx> S = Eigen::Matrix<double, kNu, kNx>::Zero();
  Vector12d q = Vector12d::Zero();
  Vector6d r = Vector6d::Zero();
  // x_{i+1} = A x_i + B u_i + b
  Matrix12d A = Matrix12d::Identity();
  Matrix12x6d B = Matrix12x6d::Zero();
  Vector12d b = Vector12d::Zero();
};

/// Stage-local convex row c(w) = 1/2 w'Ww + a'w + b0 on w = (x_i; u_i). On the
/// terminal stage only the x part of w is used.
struct StageRow {
  int stage = 0;
  Vector18d a = Vector18d::Zero();
  double b0 = 0.0;
  std::optional<Matrix18d> W;
};

/// Block-banded QP over z = [x0, u0, x1, u1, ..., xN] with x0 = x_init.
struct OcpQp {
  int N = 1;
  std::vector<OcpQpStage> stages;  // N entries
  Matrix12d QN = Matrix12d::Zero();
  Vector12d qN = Vector12d::Zero();
  Vector12d x_init = Vector12d::Zero();
  std::vector<StageRow> rows;
};

/// Riccati-recursion backend; cost per iteration linear in N.
class OcpBackend final : public QpBackend {
 public:
  explicit OcpBackend(const OcpQp& qp);

  Eigen::Index num_vars() const override { return stacked_size(qp_.N); }
  Eigen::Index num_eq() const override { return kNx * static_cast<Eigen::Index>(qp_.N + 1); }
  Eigen::Index num_ineq() const override { return static_cast<Eigen::Index>(qp_.rows.size()); }
  Eigen::VectorXd ineq_values(const Eigen::VectorXd& z) const override;
  Eigen::VectorXd ineq_jac_mul(const Eigen::VectorXd& z, const Eigen::VectorXd& v) const override;
  Eigen::VectorXd ineq_jac_tmul(const Eigen::VectorXd& z, const Eigen::VectorXd& w) const override;
  Eigen::VectorXd eq_residual(const Eigen::VectorXd& z) const override;
  Eigen::VectorXd grad_lagrangian(const Eigen::VectorXd& z, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& lambda) const override;
  void factor(const Eigen::VectorXd& z, const Eigen::VectorXd& lambda,
              const Eigen::VectorXd& sigma) override;
  void solve(const Eigen::VectorXd& rhs_d, const Eigen::VectorXd& rhs_p, Eigen::VectorXd& dz,
             Eigen::VectorXd& dy) const override;

 private:
  Vector18d stage_vector(const Eigen::VectorXd& z, int stage) const;
  Vector18d row_gradient(const StageRow& row, const Eigen::VectorXd& z) const;

  OcpQp qp_;
  std::vector<Matrix12d> P_;
  std::vector<Eigen::Matrix<double, kNu, kNx>> K_;
  std::vector<Eigen::Matrix<double, kNu, kNx>> Qux_;
  std::vector<Eigen::LLT<Matrix6d>> Quu_;
  Matrix12d QN_tilde_;
};

QpResult solve_ocp_qp(const OcpQp& qp, const QpSettings& settings = {});

}  // namespace cablelift
