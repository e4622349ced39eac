#pragma once

#include <optional>
#include <vector>

#include "cablelift/payload_ocp.hpp"
#include "cablelift/qp.hpp"

namespace cablelift {

/// Relative merit change treated as no change by the line search.
inline constexpr double kMeritRoundoff = 1e-12;

struct SolverConfig {
  int max_sqp_iters = 30;
  double kkt_tol = 1e-6;
  double merit_penalty = 1.0;  // initial l1 penalty; raised to 1.1 x max multiplier
  double backtrack = 0.5;
  double min_step = 1e-4;
  double armijo = 1e-4;
  int qp_max_iters = 100;
  double qp_tol = 1e-9;
  double regularization = 1e-8;
  double fd_step = 1e-6;

  /// Throws ConfigError on non-positive tolerances or a backtracking factor
  /// outside (0, 1).
  void validate() const;
};

struct WarmStart {
  std::vector<OcpState> states;  // N + 1
  std::vector<Wrench> inputs;    // N
};

/// Per-iteration diagnostics.
struct SolveTrace {
  std::vector<double> merit;       // merit at each accepted iterate, starting point first
  std::vector<double> merit_before;  // merit of the previous iterate under the same penalty
  std::vector<double> cost;
  std::vector<double> kkt;
  std::vector<int> qp_iterations;
  std::vector<double> step;
};

/// Multiple-shooting SQP with Gauss-Newton Hessian and l1-merit line search.
/// Hard-infeasible subproblems are reported through status, not thrown.
OcpSolution solve(const OcpProblem& problem, const std::optional<WarmStart>& warm,
                  const SolverConfig& config = {}, SolveTrace* trace = nullptr);

/// Drops the first `elapsed` stages, then truncates or pads (repeating the last
/// stage) to `new_horizon`.
WarmStart shift_warm_start(const OcpSolution& previous, int elapsed, int new_horizon);

/// Convex QP of one SQP iteration about the given iterate; exposed for tests.
OcpQp build_subproblem(const OcpProblem& problem, const std::vector<OcpState>& states,
                       const std::vector<Wrench>& inputs, const SolverConfig& config);

/// Sum of |defect|_1 and positive parts of every hard constraint.
double constraint_violation_l1(const OcpProblem& problem, const std::vector<OcpState>& states,
                               const std::vector<Wrench>& inputs);

}  // namespace cablelift
