#include <cmath>

#include "cablelift/errors.hpp"
#include "cablelift/event_trigger.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cablelift;
using namespace testing_util;

namespace {

/// Stored prediction sitting exactly on a reference at the origin.
TriggerState on_reference_state(int k_j, int N) {
  TriggerState st;
  OcpSolution sol;
  std::vector<ReferencePoint> refs(static_cast<std::size_t>(N) + 1);
  sol.states.assign(static_cast<std::size_t>(N) + 1, OcpState{});
  sol.inputs.assign(static_cast<std::size_t>(N), Wrench{});
  st.k_j = k_j;
  record_trigger(st, k_j, sol, refs, N);
  return st;
}

OcpState at_x(double x) {
  OcpState s;
  s.position = Vec3(x, 0, 0);
  return s;
}

}  // namespace

TEST_CASE("lipschitz_constant") {
  CHECK(lipschitz_constant(0, 0, 0) == 0.0);
  CHECK(lipschitz_constant(1, 0, 0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(lipschitz_constant(1, 2, 0.5) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("theoretical_threshold") {
  TriggerConfig c;
  c.eta = 0.0;
  c.sigma = 3;
  c.lip_a = 1.0;
  CHECK(theoretical_threshold(1, c) == 0.0);
  c.eta = 0.01;
  c.sigma = 1;
  CHECK(theoretical_threshold(4, c) == doctest::Approx(0.01).epsilon(1e-15));
  c.sigma = 3;
  c.lip_a = std::sqrt(2.0);  // L_P = 2
  c.delta = 0.05;
  CHECK(theoretical_threshold(1, c) == doctest::Approx(0.03 * std::exp(0.2)).epsilon(1e-14));
  CHECK(std::abs(theoretical_threshold(1, c) - 0.036642) < 1e-6);
  CHECK_THROWS_AS(theoretical_threshold(0, c), DomainError);
}

TEST_CASE("TriggerConfig validation and presets") {
  TriggerConfig c;
  CHECK_NOTHROW(c.validate());
  c.beta = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TriggerConfig{};
  c.sigma = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(trigger_preset("loose").alpha == 0.20);
  CHECK(trigger_preset("loose").beta == 0.10);
  CHECK(trigger_preset("medium").alpha == 0.10);
  CHECK(trigger_preset("medium").beta == 0.05);
  CHECK(trigger_preset("tight").alpha == 0.02);
  CHECK(trigger_preset("tight").beta == 0.01);
  CHECK_THROWS_AS(trigger_preset("sloppy"), ConfigError);
}

TEST_CASE("should_trigger") {
  TriggerConfig c;
  c.alpha = 0.5;
  c.beta = 0.25;
  c.sigma = 2;
  const TriggerState st = on_reference_state(10, 6);

  SUBCASE("uninitialized state forces a solve") {
    CHECK(should_trigger(0, OcpState{}, TriggerState{}, c).decision == TriggerDecision::forced);
  }
  SUBCASE("exact prediction does not trigger") {
    const TriggerCheck r = should_trigger(13, OcpState{}, st, c);
    CHECK(r.decision == TriggerDecision::none);
    CHECK(r.deviation == 0.0);
    CHECK(r.threshold == 0.25);
  }
  SUBCASE("a tie with the threshold does not trigger") {
    // deviation 0.5, threshold 0.5 * 0.5 + 0.25 = 0.5
    const TriggerCheck r = should_trigger(13, at_x(0.5), st, c);
    CHECK(r.deviation == r.threshold);
    CHECK(r.decision == TriggerDecision::none);
    CHECK(should_trigger(13, at_x(0.5000001), st, c).decision == TriggerDecision::event);
  }
  SUBCASE("events wait for the minimum inter-execution time") {
    CHECK(should_trigger(11, at_x(5.0), st, c).decision == TriggerDecision::none);
    CHECK(should_trigger(12, at_x(5.0), st, c).decision == TriggerDecision::event);
  }
  SUBCASE("prediction exhausted") {
    CHECK(should_trigger(16, OcpState{}, st, c).decision == TriggerDecision::forced);
    CHECK_THROWS_AS(should_trigger(17, OcpState{}, st, c), PredictionGap);
  }
  SUBCASE("theoretical mode uses the fixed threshold") {
    c.mode = TriggerMode::theoretical;
    c.eta = 0.01;
    c.sigma = 1;
    const TriggerCheck r = should_trigger(12, at_x(0.02), st, c);
    CHECK(r.threshold == doctest::Approx(0.01));
    CHECK(r.decision == TriggerDecision::event);
  }
}

TEST_CASE("first_entry_index") {
  TerminalRegion region;
  region.epsilon = 0.05;
  std::vector<ReferencePoint> refs(5);
  SUBCASE("already inside") {
    std::vector<OcpState> pred(5, OcpState{});
    CHECK(first_entry_index(pred, refs, region) == 0);
  }
  SUBCASE("entering at index 2") {
    std::vector<OcpState> pred{at_x(0.3), at_x(0.1), at_x(0.04), at_x(0.02), at_x(0.01)};
    CHECK(first_entry_index(pred, refs, region) == 2);
  }
  SUBCASE("never inside within the horizon") {
    // The terminal state itself is not a candidate.
    std::vector<OcpState> pred{at_x(0.3), at_x(0.2), at_x(0.1), at_x(0.08), at_x(0.0)};
    CHECK_FALSE(first_entry_index(pred, refs, region).has_value());
  }
  SUBCASE("weighted norm") {
    region.weight = 4.0 * Matrix12d::Identity();
    std::vector<OcpState> pred{at_x(0.04), at_x(0.02), at_x(0.0)};
    CHECK(first_entry_index(pred, refs, region) == 1);
  }
}

TEST_CASE("shrink_horizon") {
  CHECK(shrink_horizon(10, 1, 2) == 10);
  CHECK(shrink_horizon(10, 5, 2) == 6);
  CHECK(shrink_horizon(10, 5, std::nullopt) == 10);
  CHECK(shrink_horizon(10, 9, 0, 4) == 4);
  CHECK(shrink_horizon(10, 9, 0, 2) == 2);
  CHECK_THROWS_AS(shrink_horizon(10, 0, 2), InvariantViolation);
  CHECK_THROWS_AS(shrink_horizon(10, 11, 2), InvariantViolation);
}

TEST_CASE("shrink_horizon keeps the nesting chain for every admissible input") {
  for (int N = 1; N <= 25; ++N) {
    for (int m = 1; m <= N; ++m) {
      for (int h = -1; h < N; ++h) {
        const std::optional<int> n_hat = h < 0 ? std::nullopt : std::optional<int>(h);
        for (int floor : {1, 2, 3}) {
          const int next = shrink_horizon(N, m, n_hat, floor);
          CHECK(horizon_chain_holds(0, N, m, next));
          CHECK(next <= N);
          CHECK(next >= std::min(N, floor));
        }
      }
    }
  }
  CHECK_FALSE(horizon_chain_holds(0, 10, 5, 5));
  CHECK_FALSE(horizon_chain_holds(0, 10, 5, 11));
  CHECK(horizon_chain_holds(0, 10, 5, 6));
}

TEST_CASE("record_trigger") {
  TriggerState st;
  OcpSolution sol;
  sol.states.assign(4, OcpState{});
  sol.inputs.assign(3, Wrench{});
  const std::vector<ReferencePoint> refs(4);
  record_trigger(st, 0, sol, refs, 3);
  CHECK(st.trigger_count == 1);
  CHECK(st.initialized);
  record_trigger(st, 2, sol, refs, 3);
  CHECK(st.k_j == 2);
  CHECK(st.trigger_count == 2);
  CHECK_THROWS_AS(record_trigger(st, 4, sol, refs, 2), InvariantViolation);
  CHECK_THROWS_AS(record_trigger(st, 1, sol, refs, 3), InvariantViolation);
}

TEST_CASE("replayed trigger counts are monotone in alpha and beta") {
  for (int trial = 0; trial < 200; ++trial) {
    const int K = 300;
    std::vector<double> inc(K), norms(K);
    for (int k = 0; k < K; ++k) {
      inc[static_cast<std::size_t>(k)] = uniform(0.0, 0.05);
      norms[static_cast<std::size_t>(k)] = uniform(0.0, 1.0);
    }
    const int sigma = 1 + trial % 3;
    const int H = 5 + trial % 20;
    const double a1 = uniform(0.0, 0.3), b1 = uniform(0.001, 0.2);
    const double a2 = a1 + uniform(0.0, 0.2), b2 = b1 + uniform(0.0, 0.1);
    const int tight = replay_trigger_count(inc, norms, a1, b1, sigma, H);
    const int loose = replay_trigger_count(inc, norms, a2, b2, sigma, H);
    CHECK(loose <= tight);
    CHECK(loose >= 1 + (K - 1) / H);
  }
}
