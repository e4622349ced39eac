#pragma once

#include "cablelift/run_log.hpp"
#include "cablelift/scenario_config.hpp"

namespace cablelift {

/// Level payload moving on a horizontal circle, with the hover wrench as the
/// input reference. Throws DomainError unless T_c > 0.
ReferencePoint reference_circle(double t, double r, double T_c, double h,
                                double payload_mass = 0.232, double gravity = 9.81);

ReferencePoint reference_at(const ReferenceSpec& spec, double t, const PayloadModel& model);

/// Equilibrium stack at the t = 0 reference plus the configured offset. The
/// payload-only plant has no MAV entries.
FullState initial_state(const ScenarioConfig& config);

/// Terminal region used for the horizon rule: sqrt(e^T Q_XN e) <= epsilon.
TerminalRegion terminal_region(const ScenarioConfig& config, const Matrix12d& Q_XN);

/// Runs the whole loop for config.duration. Throws SolverAbort on an
/// infeasible forced solve, NonFiniteState or InvariantViolation otherwise.
RunLog run_closed_loop(const ScenarioConfig& config);

}  // namespace cablelift
