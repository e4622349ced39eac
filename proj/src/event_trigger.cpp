#include "cablelift/event_trigger.hpp"

#include <algorithm>
#include <cmath>

#include "cablelift/errors.hpp"

namespace cablelift {

void TriggerConfig::validate() const {
  if (alpha < 0.0) throw ConfigError("trigger: alpha must be >= 0");
  if (!(beta > 0.0)) throw ConfigError("trigger: beta must be > 0");
  if (sigma < 1) throw ConfigError("trigger: sigma must be >= 1");
  if (eta < 0.0 || lip_a < 0.0 || lip_b < 0.0 || lip_rho < 0.0) {
    throw ConfigError("trigger: eta and Lipschitz parameters must be >= 0");
  }
  if (!(delta > 0.0)) throw ConfigError("trigger: delta must be > 0");
}

TriggerConfig trigger_preset(const std::string& name) {
  TriggerConfig c;
  if (name == "loose") {
    c.alpha = 0.20;
    c.beta = 0.10;
  } else if (name == "medium") {
    c.alpha = 0.10;
    c.beta = 0.05;
  } else if (name == "tight") {
    c.alpha = 0.02;
    c.beta = 0.01;
  } else {
    throw ConfigError("unknown trigger preset '" + name + "'");
  }
  return c;
}

std::vector<std::string> trigger_preset_names() { return {"loose", "medium", "tight"}; }

double TerminalRegion::weighted_norm(const Vector12d& e) const {
  return std::sqrt(std::max(0.0, e.dot(weight * e)));
}

const char* to_string(TriggerDecision d) {
  switch (d) {
    case TriggerDecision::none: return "none";
    case TriggerDecision::event: return "event";
    case TriggerDecision::forced: return "forced";
  }
  return "unknown";
}

double lipschitz_constant(double a, double b, double rho) {
  return std::sqrt(2.0 * (a * a + rho * rho * b * b));
}

double theoretical_threshold(int m, const TriggerConfig& c) {
  if (m < 1) throw DomainError("theoretical_threshold: m must be >= 1");
  const double L = lipschitz_constant(c.lip_a, c.lip_b, c.lip_rho);
  return c.sigma * c.eta * std::exp(L * c.delta * (c.sigma - 1));
}

TriggerCheck should_trigger(int k, const OcpState& current, const TriggerState& state,
                            const TriggerConfig& config) {
  TriggerCheck out;
  if (!state.initialized) {
    out.decision = TriggerDecision::forced;
    return out;
  }
  const int m = k - state.k_j;
  if (m < 0) throw DomainError("should_trigger: k precedes the last execution");
  if (m > state.N_kj || static_cast<std::size_t>(m) >= state.predicted.states.size() ||
      static_cast<std::size_t>(m) >= state.references.size()) {
    throw PredictionGap("should_trigger: step lies beyond the stored prediction");
  }
  const auto s = static_cast<std::size_t>(m);
  const Vector12d e_now = state_error(current, state.references[s]);
  const Vector12d e_pred = state_error(state.predicted.states[s], state.references[s]);
  out.state_norm = e_now.norm();
  out.deviation = (e_now - e_pred).norm();
  out.threshold = config.mode == TriggerMode::relative
                      ? config.alpha * out.state_norm + config.beta
                      : theoretical_threshold(std::max(m, 1), config);
  if (m == state.N_kj) {
    out.decision = TriggerDecision::forced;
  } else if (m >= config.sigma && out.deviation > out.threshold) {
    out.decision = TriggerDecision::event;
  }
  return out;
}

std::optional<int> first_entry_index(const std::vector<OcpState>& predicted,
                                     const std::vector<ReferencePoint>& references,
                                     const TerminalRegion& region) {
  if (predicted.empty()) throw DimensionMismatch("first_entry_index: empty prediction");
  if (references.size() < predicted.size()) {
    throw DimensionMismatch("first_entry_index: references shorter than prediction");
  }
  const int N = static_cast<int>(predicted.size()) - 1;
  for (int i = 0; i < std::max(N, 1) && i <= N; ++i) {
    const auto s = static_cast<std::size_t>(i);
    if (region.contains(state_error(predicted[s], references[s]))) return i;
  }
  return std::nullopt;
}

bool horizon_chain_holds(int k_j, int N_kj, int k_next, int N_next) {
  return N_next >= 1 && k_j + N_kj < k_next + N_next && k_next + N_next <= k_next + N_kj;
}

int shrink_horizon(int N_kj, int m_k, std::optional<int> N_hat, int floor) {
  if (m_k < 1 || m_k > N_kj) {
    throw InvariantViolation("shrink_horizon: inter-execution time outside [1, N_kj]");
  }
  const int n_hat = N_hat.value_or(N_kj);
  const int n = std::max(0, std::min(m_k - 1, N_kj - n_hat));
  const int N_next = std::max(N_kj - n, std::min(N_kj, floor));
  if (!horizon_chain_holds(0, N_kj, m_k, N_next)) {
    throw InvariantViolation("shrink_horizon: horizon nesting chain violated");
  }
  return N_next;
}

void record_trigger(TriggerState& state, int k, const OcpSolution& solution,
                    const std::vector<ReferencePoint>& references, int new_horizon) {
  if (solution.horizon() != new_horizon ||
      solution.states.size() != static_cast<std::size_t>(new_horizon) + 1 ||
      references.size() != static_cast<std::size_t>(new_horizon) + 1) {
    throw InvariantViolation("record_trigger: solution horizon does not match new horizon");
  }
  if (state.initialized && k < state.k_j) {
    throw InvariantViolation("record_trigger: trigger steps must be non-decreasing");
  }
  state.initialized = true;
  state.k_j = k;
  state.N_kj = new_horizon;
  state.predicted = solution;
  state.references = references;
  ++state.trigger_count;
}

int replay_trigger_count(const std::vector<double>& increments,
                         const std::vector<double>& state_norms, double alpha, double beta,
                         int sigma, int horizon) {
  if (increments.size() != state_norms.size()) {
    throw DimensionMismatch("replay_trigger_count: trace lengths differ");
  }
  if (horizon < 1 || sigma < 1) throw DomainError("replay_trigger_count: horizon, sigma >= 1");
  int count = 1;
  int k_j = 0;
  double accumulated = 0.0;
  for (int k = 1; k < static_cast<int>(increments.size()); ++k) {
    accumulated += increments[static_cast<std::size_t>(k)];
    const int m = k - k_j;
    const bool forced = m == horizon;
    const bool event =
        m >= sigma && accumulated > alpha * state_norms[static_cast<std::size_t>(k)] + beta;
    if (forced || event) {
      ++count;
      k_j = k;
      accumulated = 0.0;
    }
  }
  return count;
}

}  // namespace cablelift
