#include "cablelift/closed_loop.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "cablelift/cable_control.hpp"
#include "cablelift/errors.hpp"
#include "cablelift/sqp_solver.hpp"
#include "cablelift/tension_allocation.hpp"

namespace cablelift {

namespace {

Wrench hover_wrench(double mass, double gravity) {
  return {Vec3(0.0, 0.0, mass * gravity), Vec3::Zero()};
}

std::vector<OcpState> rollout(const OcpState& x0, const std::vector<Wrench>& inputs, double dt,
                              const PayloadModel& model) {
  std::vector<OcpState> xs{x0};
  for (const auto& u : inputs) xs.push_back(discretize(xs.back(), u, dt, model));
  return xs;
}

bool finite(const BodyState& b) {
  return b.position.allFinite() && b.velocity.allFinite() && b.omega.allFinite() &&
         b.attitude.coeffs().allFinite();
}

void check_finite(const FullState& s, double t) {
  bool ok = finite(s.payload);
  for (const auto& m : s.mavs) ok = ok && finite(m);
  if (!ok) throw NonFiniteState("closed loop: non-finite state at t = " + std::to_string(t));
}

}  // namespace

ReferencePoint reference_circle(double t, double r, double T_c, double h, double payload_mass,
                                double gravity) {
  if (!(T_c > 0.0)) throw DomainError("reference_circle: period must be positive");
  const double w = 2.0 * std::numbers::pi / T_c;
  const double c = std::cos(w * t), s = std::sin(w * t);
  ReferencePoint ref;
  ref.p_des = Vec3(r * c, r * s, h);
  ref.v_des = Vec3(-r * w * s, r * w * c, 0.0);
  ref.a_des = Vec3(-r * w * w * c, -r * w * w * s, 0.0);
  ref.wrench_des = hover_wrench(payload_mass, gravity);
  return ref;
}

ReferencePoint reference_at(const ReferenceSpec& spec, double t, const PayloadModel& model) {
  switch (spec.kind) {
    case ReferenceKind::circle:
      return reference_circle(t, spec.radius, spec.period, spec.height, model.mass,
                              model.gravity);
    case ReferenceKind::hover: {
      ReferencePoint ref;
      ref.p_des = spec.hover_position;
      ref.wrench_des = hover_wrench(model.mass, model.gravity);
      return ref;
    }
    case ReferenceKind::waypoints: {
      const auto& w = spec.waypoints;
      if (w.empty()) throw ConfigError("reference: empty waypoint list");
      ReferencePoint ref;
      ref.wrench_des = hover_wrench(model.mass, model.gravity);
      if (t <= w.front().first) {
        ref.p_des = w.front().second;
      } else if (t >= w.back().first) {
        ref.p_des = w.back().second;
      } else {
        std::size_t i = 1;
        while (w[i].first < t) ++i;
        const double span = w[i].first - w[i - 1].first;
        const double a = (t - w[i - 1].first) / span;
        ref.p_des = (1.0 - a) * w[i - 1].second + a * w[i].second;
        ref.v_des = (w[i].second - w[i - 1].second) / span;
      }
      return ref;
    }
  }
  throw ConfigError("reference: unknown kind");
}

FullState initial_state(const ScenarioConfig& config) {
  const PayloadModel model = PayloadModel::from(config.system);
  const Vec3 p0 = reference_at(config.reference, 0.0, model).p_des + config.initial_offset;
  if (config.plant == PlantKind::payload_only) {
    FullState s;
    s.payload.position = p0;
    return s;
  }
  return hover_equilibrium(config.system, p0);
}

TerminalRegion terminal_region(const ScenarioConfig& config, const Matrix12d& Q_XN) {
  TerminalRegion region;
  region.epsilon = config.terminal_epsilon;
  region.weight = Q_XN;
  return region;
}

RunLog run_closed_loop(const ScenarioConfig& config) {
  config.validate();
  const SystemParams& sys = config.system;
  const PayloadModel model = PayloadModel::from(sys);
  const int ticks_per_step = config.ticks_per_nmpc();
  const int total_ticks =
      static_cast<int>(std::ceil(config.duration / config.control_dt - 1e-9));
  const bool full_plant = config.plant == PlantKind::full;
  const std::size_t n = sys.count();

  CostWeights weights = config.weights;
  if (config.terminal_from_lqr) {
    weights.Q_XN = lqr_terminal_weight(model, weights.Q_X, weights.Q_U, config.nmpc_dt);
  }
  const TerminalRegion region = terminal_region(config, weights.Q_XN);
  const AllocationMap map = build_allocation(sys.attachments);

  OcpConfig ocp;
  ocp.dt = config.nmpc_dt;
  ocp.weights = weights;
  ocp.model = model;
  ocp.obstacle = config.obstacle;
  if (config.ocp_tension_bound) ocp.tension = TensionBound::from(map, sys.tension_max);
  if (config.ocp_funnel) ocp.funnel = config.funnels.payload;
  ocp.funnel_weight = config.funnel_weight;

  std::vector<CableQuadrotorController> controllers;
  if (full_plant) {
    for (std::size_t i = 0; i < n; ++i) {
      controllers.emplace_back(sys.mav_mass[i], sys.cable_length[i], sys.mav_inertia[i],
                               config.gains, config.control_dt);
    }
  }

  DisturbanceModel dist_model = config.disturbance;
  dist_model.seed = config.seed;
  DisturbanceSource disturbance(dist_model);

  ConstraintBounds bounds;
  bounds.f_max = sys.tension_max;
  bounds.obstacle = config.obstacle;

  RunLog log;
  log.scenario = config.name;
  log.seed = config.seed;
  log.control_dt = config.control_dt;
  log.n_mavs = full_plant ? n : 0;
  log.funnel_payload = config.funnels.payload(0.0);
  log.ticks.reserve(static_cast<std::size_t>(total_ticks));

  FullState state = initial_state(config);
  TriggerState trig;
  Vector12d pending_disturbance = Vector12d::Zero();

  for (int tick = 0; tick < total_ticks; ++tick) {
    const double t = tick * config.control_dt;
    check_finite(state, t);
    TickRecord rec;
    rec.tick = tick;
    rec.t = t;
    rec.state = state;
    rec.reference = reference_at(config.reference, t, model);

    if (tick % ticks_per_step == 0) {
      const int k = tick / ticks_per_step;
      rec.nmpc_step = k;
      const TriggerCheck check = should_trigger(k, state.payload, trig, config.trigger);
      rec.decision = check.decision;
      rec.deviation = check.deviation;
      rec.threshold = check.threshold;

      if (check.decision != TriggerDecision::none) {
        TriggerEvent ev;
        ev.t = t;
        ev.k = k;
        ev.type = check.decision;
        int N_next = config.horizon;
        if (trig.initialized) {
          const int m = k - trig.k_j;
          ev.m_k = m;
          ev.horizon_before = trig.N_kj;
          const bool m_ok = check.decision == TriggerDecision::forced
                                ? m == trig.N_kj
                                : (m >= config.trigger.sigma && m <= trig.N_kj);
          if (!m_ok) ++log.sigma_violations;
          const auto N_hat = first_entry_index(trig.predicted.states, trig.references, region);
          N_next = shrink_horizon(trig.N_kj, m, N_hat,
                                  std::max(config.horizon_floor, config.trigger.sigma));
          if (!horizon_chain_holds(trig.k_j, trig.N_kj, k, N_next)) ++log.chain_violations;
        } else {
          ev.horizon_before = config.horizon;
        }
        ev.horizon_after = N_next;

        std::vector<ReferencePoint> window;
        for (int i = 0; i <= N_next; ++i) {
          window.push_back(reference_at(config.reference, (k + i) * config.nmpc_dt, model));
        }
        ocp.N = N_next;
        const OcpProblem problem = build_ocp(state.payload, window, ocp, k * config.nmpc_dt);
        std::optional<WarmStart> warm;
        if (trig.initialized) warm = shift_warm_start(trig.predicted, k - trig.k_j, N_next);

        const auto t0 = std::chrono::steady_clock::now();
        OcpSolution sol = solve(problem, warm, config.solver);
        const auto t1 = std::chrono::steady_clock::now();

        ev.solver.iterations = sol.iterations;
        ev.solver.cost = sol.cost;
        ev.solver.kkt_residual = sol.kkt_residual;
        ev.solver.max_defect = sol.max_defect;
        ev.solver.status = sol.status;
        if (config.record_timing) {
          ev.solver.solve_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        }
        ev.terminal_norm = region.weighted_norm(state_error(state.payload, window.front()));
        ev.outside_terminal = ev.terminal_norm > region.epsilon;
        rec.solved = true;
        rec.solver = ev.solver;

        if (sol.status == SolveStatus::infeasible) {
          if (check.decision == TriggerDecision::forced) {
            throw SolverAbort("closed loop: infeasible OCP at forced execution k = " +
                              std::to_string(k));
          }
          ev.applied = false;
        } else {
          // The stored prediction is the nominal response to the inputs that
          // will actually be applied.
          sol.states = rollout(state.payload, sol.inputs, config.nmpc_dt, model);
          record_trigger(trig, k, sol, window, N_next);
        }
        log.events.push_back(ev);
      }
      pending_disturbance = config.disturbance.kind == DisturbanceKind::none
                                ? Vector12d::Zero()
                                : disturbance.sample();
    }

    const int idx = tick / ticks_per_step - trig.k_j;
    if (idx < 0 || idx >= trig.predicted.horizon()) {
      throw PredictionGap("closed loop: no stored input for the current step");
    }
    const Wrench w = trig.predicted.inputs[static_cast<std::size_t>(idx)];
    rec.wrench = w;
    rec.horizon = trig.N_kj;
    rec.prediction_index = idx;
    // Tick-counted position inside the stored prediction must agree.
    const int idx_ticks = (tick - trig.k_j * ticks_per_step) / ticks_per_step;
    if (idx_ticks != idx ||
        w.vector() != trig.predicted.inputs[static_cast<std::size_t>(idx_ticks)].vector()) {
      ++log.open_loop_mismatches;
    }

    const RotationMatrix R_L = state.payload.attitude.toRotationMatrix();
    std::vector<Vec3> mu = allocate(w.force, w.moment, R_L, map);
    std::vector<Vec3> mav_desired;
    std::vector<Vec3> mav_positions;

    if (full_plant) {
      for (const auto& m : state.mavs) mav_positions.push_back(m.position);
      if (config.redistribute) {
        SeparationGeometry geom;
        geom.payload_position = state.payload.position;
        geom.payload_rotation = R_L;
        geom.cable_length = sys.cable_length;
        geom.d_safe = config.d_safe;
        geom.weight = config.lambda_sep;
        const Redistribution red = nullspace_redistribute(mu, mav_positions, map, geom);
        mu = apply_nullspace(mu, red.c, R_L, map);
      }
      PayloadCommand cmd;
      cmd.force = w.force;
      cmd.moment = w.moment;
      cmd.accel = w.force / model.mass + model.gravity_vector();
      const Vec3& W = state.payload.omega;
      cmd.omega_dot = model.inertia.ldlt().solve(w.moment - W.cross(model.inertia * W));

      std::vector<MavCommand> commands(n);
      for (std::size_t i = 0; i < n; ++i) {
        const MavControlOutput out = controllers[i].update(
            state.mavs[i], state.payload, sys.attachments[i], mu[i], cmd, sys.gravity);
        commands[i] = out.command;
      }

      const double h = config.control_dt / config.plant_substeps;
      for (int sub = 0; sub < config.plant_substeps; ++sub) {
        const bool kick = sub == 0 && tick % ticks_per_step == 0;
        WorldStep step = step_world(state, commands, sys, h,
                                    kick ? pending_disturbance : Vector12d::Zero());
        if (sub == 0) {
          for (const auto& c : step.cables) {
            rec.tensions.push_back(c.tension);
            rec.directions.push_back(c.direction);
          }
        }
        state = std::move(step.state);
      }
      mav_desired = mav_desired_positions(rec.reference, sys.attachments, sys.cable_length);
    } else {
      for (const auto& f : mu) {
        rec.tensions.push_back(f.norm());
        rec.directions.push_back(f.norm() > kTensionFloor ? Vec3(-f.normalized()) : Vec3(-Vec3::UnitZ()));
      }
      const double h = config.control_dt / config.plant_substeps;
      for (int sub = 0; sub < config.plant_substeps; ++sub) {
        state.payload = discretize(state.payload, w, h, model);
      }
      if (tick % ticks_per_step == 0) state.payload = perturb_body(state.payload, pending_disturbance);
    }

    WorldSnapshot snap;
    snap.t = t;
    snap.payload_position = rec.state.payload.position;
    snap.mav_positions = mav_positions;
    snap.tensions = rec.tensions;
    rec.constraints = check_all(snap, rec.reference, mav_desired, config.funnels, bounds);
    rec.payload_error = payload_los_error(rec.state.payload.position, rec.reference.p_des);
    log.ticks.push_back(std::move(rec));
  }
  return log;
}

}  // namespace cablelift
