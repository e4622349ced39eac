#include "cablelift/run_log.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <type_traits>

#include "cablelift/errors.hpp"

namespace cablelift {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void put_vec(std::ostream& out, const Vec3& v) {
  out << ',' << fmt(v.x()) << ',' << fmt(v.y()) << ',' << fmt(v.z());
}

void head_vec(std::ostream& out, const std::string& name, const std::string& unit) {
  for (const char* c : {"x", "y", "z"}) out << ',' << name << '_' << c << '_' << unit;
}

bool is_funnel(const std::string& id) {
  return id.rfind("payload_funnel", 0) == 0 || id.rfind("mav_funnel", 0) == 0 ||
         id.rfind("pair_", 0) == 0;
}

template <class Write>
void to_file(const std::string& path, Write&& write) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write(out);
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace

std::vector<double> pair_separations(const FullState& state) {
  std::vector<double> out;
  const std::size_t n = state.mavs.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      out.push_back(pair_separation(state.mavs[i].position, state.mavs[j].position));
    }
  }
  return out;
}

Summary summarize(const RunLog& log, double transient, double lyapunov_tol) {
  if (log.ticks.empty()) throw EmptyLog("summarize: log has no ticks");
  Summary s;
  s.scenario = log.scenario;
  s.seed = log.seed;
  s.ticks = static_cast<int>(log.ticks.size());
  s.duration = log.ticks.back().t + log.control_dt;
  s.transient = transient;

  double sq = 0.0, sq_after = 0.0;
  int n_after = 0;
  double min_sep = std::numeric_limits<double>::infinity();
  double max_sep = 0.0;
  for (const auto& r : log.ticks) {
    sq += r.payload_error * r.payload_error;
    s.max_error = std::max(s.max_error, r.payload_error);
    if (r.t >= transient) {
      sq_after += r.payload_error * r.payload_error;
      s.max_error_after_transient = std::max(s.max_error_after_transient, r.payload_error);
      ++n_after;
    }
    for (double d : pair_separations(r.state)) {
      min_sep = std::min(min_sep, d);
      max_sep = std::max(max_sep, d);
    }
    bool funnel = false, any = false;
    for (const auto& e : r.constraints.entries) {
      if (e.satisfied) continue;
      any = true;
      funnel = funnel || is_funnel(e.id);
    }
    s.funnel_violations += funnel ? 1 : 0;
    s.constraint_violations += any ? 1 : 0;
  }
  s.rms_error = std::sqrt(sq / static_cast<double>(log.ticks.size()));
  s.rms_error_after_transient = n_after > 0 ? std::sqrt(sq_after / n_after) : 0.0;
  if (log.n_mavs >= 2) {
    s.min_separation = min_sep;
    s.max_separation = max_sep;
    s.initial_separations = pair_separations(log.ticks.front().state);
    s.final_separations = pair_separations(log.ticks.back().state);
  }

  double solve_time = 0.0;
  int solves = 0;
  double m_sum = 0.0;
  int m_count = 0;
  const TriggerEvent* last_forced = nullptr;
  for (const auto& e : log.events) {
    ++solves;
    solve_time += e.solver.solve_time_ms;
    if (!e.applied) {
      ++s.skipped_solves;
      continue;
    }
    ++s.nmpc_executions;
    if (e.type == TriggerDecision::event) ++s.event_triggers;
    else ++s.forced_triggers;
    if (e.m_k > 0) {
      m_sum += e.m_k;
      ++m_count;
    }
    s.horizon_trace.push_back(e.horizon_after);
    if (e.type == TriggerDecision::forced) {
      if (last_forced && last_forced->outside_terminal) {
        ++s.lyapunov_checks;
        const double inc = e.solver.cost - last_forced->solver.cost;
        const double tol = lyapunov_tol * std::max(1.0, std::abs(last_forced->solver.cost));
        if (inc > tol) {
          ++s.lyapunov_increases;
          s.lyapunov_max_increase = std::max(s.lyapunov_max_increase, inc);
        }
      }
      last_forced = &e;
    }
  }
  s.mean_solve_time_ms = solves > 0 ? solve_time / solves : 0.0;
  s.mean_m_k = m_count > 0 ? m_sum / m_count : 0.0;
  s.sigma_violations = log.sigma_violations;
  s.chain_violations = log.chain_violations;
  s.open_loop_mismatches = log.open_loop_mismatches;
  return s;
}

void write_csv(const RunLog& log, std::ostream& out) {
  out << "t_s,tick,nmpc_step,decision,horizon,prediction_index,deviation,threshold";
  head_vec(out, "p_L", "m");
  head_vec(out, "v_L", "mps");
  out << ",q_L_w,q_L_x,q_L_y,q_L_z";
  head_vec(out, "omega_L", "radps");
  head_vec(out, "p_des", "m");
  head_vec(out, "v_des", "mps");
  head_vec(out, "F", "N");
  head_vec(out, "M", "Nm");
  out << ",e_L_m";
  for (std::size_t i = 0; i < log.n_mavs; ++i) {
    const std::string id = std::to_string(i);
    head_vec(out, "p" + id, "m");
    out << ",T" << id << "_N";
    head_vec(out, "xi" + id, "1");
  }
  out << ",sqp_iterations,solve_cost,kkt_residual,solve_status,solve_time_ms,violations\n";

  for (const auto& r : log.ticks) {
    out << fmt(r.t) << ',' << r.tick << ',' << r.nmpc_step << ',' << to_string(r.decision) << ','
        << r.horizon << ',' << r.prediction_index << ',' << fmt(r.deviation) << ','
        << fmt(r.threshold);
    const auto& p = r.state.payload;
    put_vec(out, p.position);
    put_vec(out, p.velocity);
    out << ',' << fmt(p.attitude.w()) << ',' << fmt(p.attitude.x()) << ','
        << fmt(p.attitude.y()) << ',' << fmt(p.attitude.z());
    put_vec(out, p.omega);
    put_vec(out, r.reference.p_des);
    put_vec(out, r.reference.v_des);
    put_vec(out, r.wrench.force);
    put_vec(out, r.wrench.moment);
    out << ',' << fmt(r.payload_error);
    for (std::size_t i = 0; i < log.n_mavs; ++i) {
      put_vec(out, i < r.state.mavs.size() ? r.state.mavs[i].position : Vec3::Zero());
      out << ',' << fmt(i < r.tensions.size() ? r.tensions[i] : 0.0);
      put_vec(out, i < r.directions.size() ? r.directions[i] : Vec3::Zero());
    }
    if (r.solved) {
      out << ',' << r.solver.iterations << ',' << fmt(r.solver.cost) << ','
          << fmt(r.solver.kkt_residual) << ',' << to_string(r.solver.status) << ','
          << fmt(r.solver.solve_time_ms);
    } else {
      out << ",,,,,";
    }
    out << ',' << r.constraints.violation_count() << '\n';
  }
}

void write_summary(const Summary& s, std::ostream& out) {
  auto list = [](const auto& v) {
    std::string t;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) t += ' ';
      if constexpr (std::is_same_v<std::decay_t<decltype(v[i])>, int>) t += std::to_string(v[i]);
      else t += fmt(v[i]);
    }
    return t;
  };
  out << "scenario=" << s.scenario << '\n'
      << "seed=" << s.seed << '\n'
      << "ticks=" << s.ticks << '\n'
      << "duration_s=" << fmt(s.duration) << '\n'
      << "nmpc_executions=" << s.nmpc_executions << '\n'
      << "event_triggers=" << s.event_triggers << '\n'
      << "forced_triggers=" << s.forced_triggers << '\n'
      << "skipped_solves=" << s.skipped_solves << '\n'
      << "rms_error_m=" << fmt(s.rms_error) << '\n'
      << "transient_s=" << fmt(s.transient) << '\n'
      << "rms_error_after_transient_m=" << fmt(s.rms_error_after_transient) << '\n'
      << "max_error_m=" << fmt(s.max_error) << '\n'
      << "max_error_after_transient_m=" << fmt(s.max_error_after_transient) << '\n'
      << "min_separation_m=" << fmt(s.min_separation) << '\n'
      << "max_separation_m=" << fmt(s.max_separation) << '\n'
      << "initial_separations_m=" << list(s.initial_separations) << '\n'
      << "final_separations_m=" << list(s.final_separations) << '\n'
      << "funnel_violation_ticks=" << s.funnel_violations << '\n'
      << "constraint_violation_ticks=" << s.constraint_violations << '\n'
      << "mean_solve_time_ms=" << fmt(s.mean_solve_time_ms) << '\n'
      << "mean_m_k=" << fmt(s.mean_m_k) << '\n'
      << "horizon_trace=" << list(s.horizon_trace) << '\n'
      << "sigma_violations=" << s.sigma_violations << '\n'
      << "chain_violations=" << s.chain_violations << '\n'
      << "open_loop_mismatches=" << s.open_loop_mismatches << '\n'
      << "lyapunov_checks=" << s.lyapunov_checks << '\n'
      << "lyapunov_increases=" << s.lyapunov_increases << '\n'
      << "lyapunov_max_increase=" << fmt(s.lyapunov_max_increase) << '\n';
}

void write_events(const RunLog& log, std::ostream& out) {
  out << "t_s,k,type,m_k,horizon_before,horizon_after,applied,outside_terminal,terminal_norm,"
         "sqp_iterations,cost,kkt_residual,status,solve_time_ms\n";
  for (const auto& e : log.events) {
    out << fmt(e.t) << ',' << e.k << ',' << to_string(e.type) << ',' << e.m_k << ','
        << e.horizon_before << ',' << e.horizon_after << ',' << (e.applied ? 1 : 0) << ','
        << (e.outside_terminal ? 1 : 0) << ',' << fmt(e.terminal_norm) << ','
        << e.solver.iterations << ',' << fmt(e.solver.cost) << ','
        << fmt(e.solver.kkt_residual) << ',' << to_string(e.solver.status) << ','
        << fmt(e.solver.solve_time_ms) << '\n';
  }
}

void emit_csv(const RunLog& log, const std::string& path) {
  to_file(path, [&](std::ostream& o) { write_csv(log, o); });
}

void emit_summary(const Summary& summary, const std::string& path) {
  to_file(path, [&](std::ostream& o) { write_summary(summary, o); });
}

void emit_events(const RunLog& log, const std::string& path) {
  to_file(path, [&](std::ostream& o) { write_events(log, o); });
}

}  // namespace cablelift
