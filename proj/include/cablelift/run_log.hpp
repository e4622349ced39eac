#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cablelift/event_trigger.hpp"
#include "cablelift/metrics.hpp"
#include "cablelift/payload_ocp.hpp"
#include "cablelift/plant.hpp"

namespace cablelift {

/// Solver statistics of one NMPC execution.
struct SolveStats {
  int iterations = 0;
  double cost = 0.0;
  double kkt_residual = 0.0;
  double max_defect = 0.0;
  SolveStatus status = SolveStatus::converged;
  double solve_time_ms = 0.0;  // 0 unless timing was requested
};

struct TickRecord {
  int tick = 0;
  double t = 0.0;
  int nmpc_step = -1;          // NMPC step index on NMPC ticks, -1 otherwise
  FullState state;             // at the start of the tick
  ReferencePoint reference;
  Wrench wrench;               // applied during the tick
  std::vector<double> tensions;
  std::vector<Vec3> directions;
  TriggerDecision decision = TriggerDecision::none;
  double deviation = 0.0;
  double threshold = 0.0;
  int horizon = 0;             // N of the prediction in use
  int prediction_index = 0;    // NMPC steps since the last execution
  bool solved = false;
  SolveStats solver;
  ConstraintReport constraints;
  double payload_error = 0.0;  // |p_des - p_L|
};

struct TriggerEvent {
  double t = 0.0;
  int k = 0;
  TriggerDecision type = TriggerDecision::forced;
  int m_k = 0;                 // 0 for the first execution
  int horizon_before = 0;
  int horizon_after = 0;
  bool applied = true;         // false when an infeasible event solve was discarded
  bool outside_terminal = true;
  double terminal_norm = 0.0;
  SolveStats solver;
};

struct RunLog {
  std::string scenario;
  std::uint64_t seed = 0;
  double control_dt = 0.002;
  std::size_t n_mavs = 0;
  double funnel_payload = 0.2;  // bound used for the post-transient check
  std::vector<TickRecord> ticks;
  std::vector<TriggerEvent> events;
  int sigma_violations = 0;     // events with m_k outside [sigma, N_kj]
  int chain_violations = 0;     // shrinks breaking the nesting chain
  int open_loop_mismatches = 0; // applied wrench differs from the stored prediction
};

struct Summary {
  std::string scenario;
  std::uint64_t seed = 0;
  int ticks = 0;
  double duration = 0.0;
  int nmpc_executions = 0;
  int event_triggers = 0;
  int forced_triggers = 0;
  int skipped_solves = 0;
  double rms_error = 0.0;
  double rms_error_after_transient = 0.0;
  double max_error = 0.0;
  double max_error_after_transient = 0.0;
  double transient = 3.0;
  double min_separation = 0.0;
  double max_separation = 0.0;
  std::vector<double> initial_separations;  // pair order (0,1), (0,2), ...
  std::vector<double> final_separations;
  int funnel_violations = 0;      // ticks with any funnel entry violated
  int constraint_violations = 0;  // ticks with any entry violated
  double mean_solve_time_ms = 0.0;
  double mean_m_k = 0.0;
  std::vector<int> horizon_trace;  // horizon after each applied execution
  int sigma_violations = 0;
  int chain_violations = 0;
  int open_loop_mismatches = 0;
  int lyapunov_checks = 0;
  int lyapunov_increases = 0;      // consecutive forced executions with a cost increase
  double lyapunov_max_increase = 0.0;
};

/// Throws EmptyLog when the log has no ticks.
Summary summarize(const RunLog& log, double transient = 3.0, double lyapunov_tol = 1e-6);

/// Pairwise MAV separations of one tick, pair order (0,1), (0,2), ..., (1,2), ...
std::vector<double> pair_separations(const FullState& state);

void write_csv(const RunLog& log, std::ostream& out);
void write_summary(const Summary& summary, std::ostream& out);
void write_events(const RunLog& log, std::ostream& out);

/// Throw IoError when the file cannot be written.
void emit_csv(const RunLog& log, const std::string& path);
void emit_summary(const Summary& summary, const std::string& path);
void emit_events(const RunLog& log, const std::string& path);

}  // namespace cablelift
