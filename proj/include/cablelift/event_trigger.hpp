#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cablelift/payload_ocp.hpp"

namespace cablelift {

enum class TriggerMode { relative, theoretical };

struct TriggerConfig {
  double alpha = 0.10;
  double beta = 0.05;
  int sigma = 2;          // minimum inter-execution time, NMPC steps
  double eta = 0.0;       // disturbance bound used by the theoretical threshold
  double lip_a = 0.0;
  double lip_b = 0.0;
  double lip_rho = 0.0;
  double delta = 0.05;    // s
  TriggerMode mode = TriggerMode::relative;

  void validate() const;
};

/// Built-in relative-mode presets: "loose", "medium", "tight". Throws
/// ConfigError for unknown names.
TriggerConfig trigger_preset(const std::string& name);
std::vector<std::string> trigger_preset_names();

struct TerminalRegion {
  double epsilon = 0.05;
  Matrix12d weight = Matrix12d::Identity();

  double weighted_norm(const Vector12d& e) const;
  bool contains(const Vector12d& e) const { return weighted_norm(e) <= epsilon; }
};

/// Prediction and bookkeeping of the last NMPC execution.
struct TriggerState {
  bool initialized = false;
  int k_j = 0;
  int N_kj = 0;
  int trigger_count = 0;
  OcpSolution predicted;                 // states are the open-loop prediction
  std::vector<ReferencePoint> references;  // N_kj + 1 entries aligned with predicted
};

enum class TriggerDecision { none, event, forced };
const char* to_string(TriggerDecision d);

struct TriggerCheck {
  TriggerDecision decision = TriggerDecision::none;
  double deviation = 0.0;   // |xi_f(k) - xi*_f(k|k_j)|
  double threshold = 0.0;
  double state_norm = 0.0;  // |xi_f(k)|
};

double lipschitz_constant(double a, double b, double rho);

/// sigma * eta * exp(L_P * delta * (sigma - 1)).
double theoretical_threshold(int m, const TriggerConfig& config);

/// Before initialization every call returns forced.
TriggerCheck should_trigger(int k, const OcpState& current, const TriggerState& state,
                            const TriggerConfig& config);

/// Smallest index in [0, N_kj - 1] whose predicted error lies in the region.
std::optional<int> first_entry_index(const std::vector<OcpState>& predicted,
                                     const std::vector<ReferencePoint>& references,
                                     const TerminalRegion& region);

/// Adaptive horizon after an execution m_k steps after the previous one. The
/// result never drops below min(N_kj, floor). Throws InvariantViolation when
/// m_k is outside [1, N_kj] or the nesting chain fails.
int shrink_horizon(int N_kj, int m_k, std::optional<int> N_hat, int floor = 2);

/// True iff k_j + N_kj < k_next + N_next <= k_next + N_kj and N_next >= 1.
bool horizon_chain_holds(int k_j, int N_kj, int k_next, int N_next);

/// Throws InvariantViolation if the solution horizon differs from new_horizon
/// or the reference list does not match it.
void record_trigger(TriggerState& state, int k, const OcpSolution& solution,
                    const std::vector<ReferencePoint>& references, int new_horizon);

/// Replay of recorded data: per-step deviation increments (accumulated since
/// the last execution) and state norms, with a fixed horizon. Returns the
/// number of executions including the initial one.
int replay_trigger_count(const std::vector<double>& increments,
                         const std::vector<double>& state_norms, double alpha, double beta,
                         int sigma, int horizon);

}  // namespace cablelift
