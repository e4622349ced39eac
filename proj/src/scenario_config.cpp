#include "cablelift/scenario_config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "cablelift/errors.hpp"

namespace cablelift {

namespace {

double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' expects a number, got '" + text + "'");
  }
}

int parse_int(const std::string& key, const std::string& text) {
  const double v = parse_double(key, text);
  if (v != std::floor(v)) throw ConfigError("config: '" + key + "' expects an integer");
  return static_cast<int>(v);
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = boost::algorithm::to_lower_copy(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("config: '" + key + "' expects a boolean");
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, text, boost::algorithm::is_any_of(" ,\t"),
                          boost::algorithm::token_compress_on);
  std::vector<double> out;
  for (const auto& p : parts) {
    if (!p.empty()) out.push_back(parse_double(key, p));
  }
  return out;
}

std::vector<double> parse_fixed(const std::string& key, const std::string& text, std::size_t n) {
  const auto v = parse_list(key, text);
  if (v.size() != n) {
    throw ConfigError("config: '" + key + "' expects " + std::to_string(n) + " numbers");
  }
  return v;
}

Vec3 parse_vec3(const std::string& key, const std::string& text) {
  const auto v = parse_fixed(key, text, 3);
  return Vec3(v[0], v[1], v[2]);
}

/// "a b c; d e f; ..." groups of `width` numbers.
std::vector<std::vector<double>> parse_groups(const std::string& key, const std::string& text,
                                              std::size_t width) {
  std::vector<std::string> groups;
  boost::algorithm::split(groups, text, boost::algorithm::is_any_of(";"));
  std::vector<std::vector<double>> out;
  for (auto g : groups) {
    boost::algorithm::trim(g);
    if (g.empty()) continue;
    out.push_back(parse_fixed(key, g, width));
  }
  return out;
}

PiecewiseLinear parse_profile(const std::string& key, const std::string& text) {
  if (text.find(';') == std::string::npos && parse_list(key, text).size() == 1) {
    const double v = parse_double(key, boost::algorithm::trim_copy(text));
    if (!(v > 0.0)) throw ConfigError("config: '" + key + "' must be positive");
    return PiecewiseLinear(v);
  }
  std::vector<std::pair<double, double>> knots;
  for (const auto& g : parse_groups(key, text, 2)) {
    if (!(g[1] > 0.0)) throw ConfigError("config: '" + key + "' values must be positive");
    knots.emplace_back(g[0], g[1]);
  }
  return PiecewiseLinear(std::move(knots));
}

template <int D>
Eigen::Matrix<double, D, D> parse_diag(const std::string& key, const std::string& text) {
  const auto v = parse_fixed(key, text, D);
  Eigen::Matrix<double, D, 1> d;
  for (int i = 0; i < D; ++i) d[i] = v[static_cast<std::size_t>(i)];
  return d.asDiagonal();
}

Vector12d tangent_scale(const std::string& key, const std::string& text) {
  const auto v = parse_fixed(key, text, 12);
  Vector12d s;
  for (int i = 0; i < 12; ++i) s[i] = v[static_cast<std::size_t>(i)];
  return s;
}

void resize_team(SystemParams& s, std::size_t n) {
  s.mav_mass.resize(n, s.mav_mass.empty() ? 0.15 : s.mav_mass.back());
  s.mav_inertia.resize(n, s.mav_inertia.empty() ? Mat3::Identity() : s.mav_inertia.back());
  s.cable_length.resize(n, s.cable_length.empty() ? 1.0 : s.cable_length.back());
}

using Setter = std::function<void(ScenarioConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto num = [](double ScenarioConfig::*field) {
      return [field](ScenarioConfig& c, const std::string& k, const std::string& v) {
        c.*field = parse_double(k, v);
      };
    };
    // [scenario]
    t["scenario.schema_version"] = [](ScenarioConfig&, const std::string& k, const std::string& v) {
      if (parse_int(k, v) != kSchemaVersion) {
        throw ConfigError("config: unsupported schema_version " + v);
      }
    };
    t["scenario.preset"] = [](ScenarioConfig&, const std::string&, const std::string&) {};
    t["scenario.name"] = [](ScenarioConfig& c, const std::string&, const std::string& v) { c.name = v; };
    t["scenario.duration"] = num(&ScenarioConfig::duration);
    t["scenario.seed"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      const double s = parse_double(k, v);
      if (s < 0.0 || s != std::floor(s)) throw ConfigError("config: seed must be a non-negative integer");
      c.seed = static_cast<std::uint64_t>(s);
      c.disturbance.seed = c.seed;
    };
    t["scenario.plant"] = [](ScenarioConfig& c, const std::string&, const std::string& v) {
      if (v == "full") c.plant = PlantKind::full;
      else if (v == "payload_only") c.plant = PlantKind::payload_only;
      else throw ConfigError("config: plant must be full or payload_only");
    };
    t["scenario.control_dt"] = num(&ScenarioConfig::control_dt);
    t["scenario.plant_substeps"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.plant_substeps = parse_int(k, v);
    };
    t["scenario.record_timing"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.record_timing = parse_bool(k, v);
    };
    // [system]
    t["system.payload_mass"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.system.payload_mass = parse_double(k, v);
    };
    t["system.payload_inertia"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.system.payload_inertia = parse_diag<3>(k, v);
    };
    t["system.attachments"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.system.attachments.clear();
      for (const auto& g : parse_groups(k, v, 3)) c.system.attachments.emplace_back(g[0], g[1], g[2]);
      resize_team(c.system, c.system.attachments.size());
    };
    t["system.mav_mass"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      const double m = parse_double(k, v);
      for (auto& x : c.system.mav_mass) x = m;
    };
    t["system.mav_inertia"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      const Mat3 J = parse_diag<3>(k, v);
      for (auto& x : c.system.mav_inertia) x = J;
    };
    t["system.cable_length"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      const double l = parse_double(k, v);
      for (auto& x : c.system.cable_length) x = l;
    };
    t["system.thrust_max"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.system.thrust_max = parse_double(k, v);
    };
    t["system.tension_max"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.system.tension_max = parse_double(k, v);
    };
    t["system.gravity"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.system.gravity = parse_double(k, v);
    };
    t["system.cable_stiffness"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.system.cable_stiffness = parse_double(k, v);
    };
    t["system.cable_damping"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.system.cable_damping = parse_double(k, v);
    };
    // [reference]
    t["reference.kind"] = [](ScenarioConfig& c, const std::string&, const std::string& v) {
      if (v == "circle") c.reference.kind = ReferenceKind::circle;
      else if (v == "hover") c.reference.kind = ReferenceKind::hover;
      else if (v == "waypoints") c.reference.kind = ReferenceKind::waypoints;
      else throw ConfigError("config: reference kind must be circle, hover or waypoints");
    };
    t["reference.radius"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.reference.radius = parse_double(k, v);
    };
    t["reference.period"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.reference.period = parse_double(k, v);
    };
    t["reference.height"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.reference.height = parse_double(k, v);
    };
    t["reference.position"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.reference.hover_position = parse_vec3(k, v);
    };
    t["reference.waypoints"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.reference.waypoints.clear();
      for (const auto& g : parse_groups(k, v, 4)) {
        c.reference.waypoints.emplace_back(g[0], Vec3(g[1], g[2], g[3]));
      }
    };
    // [initial]
    t["initial.offset"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.initial_offset = parse_vec3(k, v);
    };
    // [trigger]
    t["trigger.preset"] = [](ScenarioConfig& c, const std::string&, const std::string& v) {
      apply_trigger_preset(c, v);
    };
    t["trigger.alpha"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.trigger.alpha = parse_double(k, v);
      c.trigger_preset = "custom";
    };
    t["trigger.beta"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.trigger.beta = parse_double(k, v);
      c.trigger_preset = "custom";
    };
    t["trigger.sigma"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.trigger.sigma = parse_int(k, v);
    };
    t["trigger.mode"] = [](ScenarioConfig& c, const std::string&, const std::string& v) {
      if (v == "relative") c.trigger.mode = TriggerMode::relative;
      else if (v == "theoretical") c.trigger.mode = TriggerMode::theoretical;
      else throw ConfigError("config: trigger mode must be relative or theoretical");
    };
    t["trigger.eta"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.trigger.eta = parse_double(k, v);
    };
    t["trigger.lip_a"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.trigger.lip_a = parse_double(k, v);
    };
    t["trigger.lip_b"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.trigger.lip_b = parse_double(k, v);
    };
    t["trigger.lip_rho"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.trigger.lip_rho = parse_double(k, v);
    };
    t["trigger.terminal_epsilon"] = num(&ScenarioConfig::terminal_epsilon);
    t["trigger.horizon_floor"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.horizon_floor = parse_int(k, v);
    };
    // [ocp]
    t["ocp.horizon"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.horizon = parse_int(k, v);
    };
    t["ocp.dt"] = num(&ScenarioConfig::nmpc_dt);
    t["ocp.q_x"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.weights.Q_X = parse_diag<12>(k, v);
    };
    t["ocp.q_u"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.weights.Q_U = parse_diag<6>(k, v);
    };
    t["ocp.q_xn"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      if (boost::algorithm::trim_copy(v) == "lqr") {
        c.terminal_from_lqr = true;
      } else {
        c.weights.Q_XN = parse_diag<12>(k, v);
        c.terminal_from_lqr = false;
      }
    };
    t["ocp.funnel"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.ocp_funnel = parse_bool(k, v);
    };
    t["ocp.funnel_weight"] = num(&ScenarioConfig::funnel_weight);
    t["ocp.tension_bound"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.ocp_tension_bound = parse_bool(k, v);
    };
    // [solver]
    t["solver.max_sqp_iters"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.solver.max_sqp_iters = parse_int(k, v);
    };
    t["solver.kkt_tol"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.solver.kkt_tol = parse_double(k, v);
    };
    t["solver.merit_penalty"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.solver.merit_penalty = parse_double(k, v);
    };
    t["solver.backtrack"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.solver.backtrack = parse_double(k, v);
    };
    t["solver.min_step"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.solver.min_step = parse_double(k, v);
    };
    t["solver.qp_max_iters"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.solver.qp_max_iters = parse_int(k, v);
    };
    t["solver.qp_tol"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.solver.qp_tol = parse_double(k, v);
    };
    t["solver.regularization"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.solver.regularization = parse_double(k, v);
    };
    // [gains]
    t["gains.k_r"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.gains.K_R = parse_diag<3>(k, v);
    };
    t["gains.k_omega"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.gains.K_Omega = parse_diag<3>(k, v);
    };
    t["gains.k_xi"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.gains.K_xi = parse_diag<3>(k, v);
    };
    t["gains.k_cable_omega"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.gains.K_omega = parse_diag<3>(k, v);
    };
    // [disturbance]
    t["disturbance.kind"] = [](ScenarioConfig& c, const std::string&, const std::string& v) {
      if (v == "none") c.disturbance.kind = DisturbanceKind::none;
      else if (v == "uniform_bounded") c.disturbance.kind = DisturbanceKind::uniform_bounded;
      else throw ConfigError("config: disturbance kind must be none or uniform_bounded");
    };
    t["disturbance.eta"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.disturbance.eta = parse_double(k, v);
    };
    t["disturbance.scale"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.disturbance.scale = tangent_scale(k, v);
    };
    // [obstacle]
    t["obstacle.position"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      if (!c.obstacle) c.obstacle = Obstacle{};
      c.obstacle->position = parse_vec3(k, v);
    };
    t["obstacle.clearance"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      if (!c.obstacle) c.obstacle = Obstacle{};
      c.obstacle->clearance = parse_double(k, v);
    };
    // [funnels]
    t["funnels.payload"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.funnels.payload = parse_profile(k, v);
    };
    t["funnels.mav"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.funnels.mav = parse_profile(k, v);
    };
    t["funnels.pair_upper_fraction"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.funnels.pair_upper_fraction = parse_double(k, v);
    };
    t["funnels.pair_lower_fraction"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.funnels.pair_lower_fraction = parse_double(k, v);
    };
    // [separation]
    t["separation.enabled"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
      c.redistribute = parse_bool(k, v);
    };
    t["separation.d_safe"] = num(&ScenarioConfig::d_safe);
    t["separation.weight"] = num(&ScenarioConfig::lambda_sep);
    return t;
  }();
  return table;
}

}  // namespace

int ScenarioConfig::ticks_per_nmpc() const {
  const double r = nmpc_dt / control_dt;
  const double n = std::round(r);
  if (n < 1.0 || std::abs(r - n) > 1e-9 * std::max(1.0, r)) {
    throw ConfigError("config: NMPC dt must be an integer multiple of the control dt");
  }
  return static_cast<int>(n);
}

void ScenarioConfig::validate() const {
  system.validate();
  if (!(duration > 0.0)) throw ConfigError("config: duration must be positive");
  if (!(control_dt > 0.0) || !(nmpc_dt > 0.0)) throw ConfigError("config: time steps must be positive");
  if (plant_substeps < 1) throw ConfigError("config: plant_substeps must be >= 1");
  ticks_per_nmpc();
  if (horizon < 1) throw ConfigError("config: horizon must be >= 1");
  if (horizon_floor < 1) throw ConfigError("config: horizon_floor must be >= 1");
  if (!(terminal_epsilon > 0.0)) throw ConfigError("config: terminal_epsilon must be positive");
  trigger.validate();
  if (horizon < trigger.sigma) throw ConfigError("config: horizon must be at least sigma");
  weights.validate();
  solver.validate();
  gains.validate();
  if (disturbance.eta < 0.0) throw ConfigError("config: disturbance eta must be >= 0");
  if (!(funnel_weight >= 0.0)) throw ConfigError("config: funnel_weight must be >= 0");
  if (funnels.payload.empty() || funnels.mav.empty() || !(funnels.payload.min_value() > 0.0) ||
      !(funnels.mav.min_value() > 0.0)) {
    throw ConfigError("config: funnel profiles must be positive");
  }
  if (!(funnels.pair_upper_fraction > 0.0) || !(funnels.pair_lower_fraction > 0.0)) {
    throw ConfigError("config: pair funnel fractions must be positive");
  }
  if (!(d_safe >= 0.0) || !(lambda_sep >= 0.0)) throw ConfigError("config: separation settings");
  if (reference.kind == ReferenceKind::circle && !(reference.period > 0.0)) {
    throw ConfigError("config: circle period must be positive");
  }
  if (reference.kind == ReferenceKind::waypoints) {
    if (reference.waypoints.empty()) throw ConfigError("config: waypoint list is empty");
    for (std::size_t i = 1; i < reference.waypoints.size(); ++i) {
      if (!(reference.waypoints[i].first > reference.waypoints[i - 1].first)) {
        throw ConfigError("config: waypoint times must increase");
      }
    }
  }
  if (obstacle && !(obstacle->clearance >= 0.0)) throw ConfigError("config: obstacle clearance");
}

SystemParams default_system() {
  SystemParams s;
  s.attachments = {{0.3, 0.3, 0.0}, {-0.3, 0.3, 0.0}, {-0.3, -0.3, 0.0}, {0.3, -0.3, 0.0}};
  s.mav_mass.assign(4, 0.15);
  s.mav_inertia.assign(4, Vec3(2e-4, 2e-4, 3.5e-4).asDiagonal());
  s.cable_length.assign(4, 1.0);
  s.payload_mass = 0.232;
  s.payload_inertia = Vec3(0.007, 0.007, 0.014).asDiagonal();
  s.thrust_max = 3.0;
  s.tension_max = 1.5;
  return s;
}

CostWeights default_weights() {
  CostWeights w;
  Vector12d qx;
  qx << 20, 20, 20, 10, 10, 10, 4, 4, 4, 0.4, 0.4, 0.4;
  Vector6d qu;
  qu << 10, 10, 10, 100, 100, 100;
  w.Q_X = qx.asDiagonal();
  w.Q_U = qu.asDiagonal();
  w.Q_XN = 10.0 * w.Q_X;
  return w;
}

void apply_trigger_preset(ScenarioConfig& config, const std::string& preset) {
  const TriggerConfig p = trigger_preset(preset);
  config.trigger.alpha = p.alpha;
  config.trigger.beta = p.beta;
  config.trigger_preset = preset;
}

std::vector<std::string> preset_names() {
  return {"circle", "hover", "hover_recovery", "circle_payload_only", "hover_recovery_payload_only"};
}

std::string preset_description(const std::string& name) {
  if (name == "circle") return "4 MAVs carry the payload around a 1 m circle (15 s period) at 0.5 m";
  if (name == "hover") return "4 MAVs hold the payload at equilibrium, no disturbance";
  if (name == "hover_recovery") return "hover with the payload released 0.3 m off the set point, no disturbance";
  if (name == "circle_payload_only") return "circle reference, wrench applied directly to the payload, no disturbance";
  if (name == "hover_recovery_payload_only") return "0.3 m recovery with the wrench applied directly to the payload";
  throw ConfigError("unknown scenario preset '" + name + "'");
}

ScenarioConfig preset_config(const std::string& name) {
  ScenarioConfig c;
  c.system = default_system();
  c.weights = default_weights();
  apply_trigger_preset(c, "medium");
  c.disturbance.kind = DisturbanceKind::uniform_bounded;
  c.disturbance.eta = 0.01;
  c.disturbance.seed = c.seed;
  // Velocity-level kicks only: a pose jump stretches the stiff cables instantly.
  c.disturbance.scale << 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1;
  c.name = name;
  if (name == "circle") {
    c.reference.kind = ReferenceKind::circle;
  } else if (name == "hover" || name == "hover_recovery" ||
             name == "hover_recovery_payload_only") {
    c.reference.kind = ReferenceKind::hover;
    c.reference.hover_position = Vec3(0.0, 0.0, 0.5);
    c.disturbance.kind = DisturbanceKind::none;
    c.disturbance.eta = 0.0;
    c.duration = 10.0;
    if (name != "hover") c.initial_offset = Vec3(0.3, 0.0, 0.0);
    if (name == "hover_recovery_payload_only") c.plant = PlantKind::payload_only;
  } else if (name == "circle_payload_only") {
    c.reference.kind = ReferenceKind::circle;
    c.plant = PlantKind::payload_only;
    c.disturbance.kind = DisturbanceKind::none;
    c.disturbance.eta = 0.0;
  } else {
    throw ConfigError("unknown scenario preset '" + name + "'");
  }
  return c;
}

ScenarioConfig parse_config(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  const auto scenario = tree.get_child_optional("scenario");
  if (!scenario || !scenario->get_optional<std::string>("schema_version")) {
    throw ConfigError("config: [scenario] schema_version is required");
  }
  ScenarioConfig c = preset_config(scenario->get<std::string>("preset", "circle"));
  const auto& table = setters();
  // Apply in file order, but schema_version first so version errors win.
  table.at("scenario.schema_version")(c, "scenario.schema_version",
                                       scenario->get<std::string>("schema_version"));
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("config: key '" + section + "' outside of any section");
    }
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      const auto it = table.find(full);
      if (it == table.end()) throw ConfigError("config: unknown key '" + full + "'");
      it->second(c, full, boost::algorithm::trim_copy(value.data()));
    }
  }
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot open '" + path + "'");
  return parse_config(in);
}

Matrix12d lqr_terminal_weight(const PayloadModel& model, const Matrix12d& Q_X,
                              const Matrix6d& Q_U, double dt) {
  OcpState hover;
  const Wrench u{-model.mass * model.gravity_vector(), Vec3::Zero()};
  const OcpState next = discretize(hover, u, dt, model);
  const Linearization lin = linearize_dynamics(hover, u, next, dt, model);
  ReferencePoint ref;
  const Matrix12d J = state_error_jacobian(hover, ref);
  const Matrix12d Q = J.transpose() * Q_X * J;
  Matrix12d P = Q;
  for (int it = 0; it < 100000; ++it) {
    const Matrix6d S = Q_U + lin.B.transpose() * P * lin.B;
    const Matrix12d Pn = Q + lin.A.transpose() * P * lin.A -
                         lin.A.transpose() * P * lin.B * S.ldlt().solve(lin.B.transpose() * P * lin.A);
    const double change = (Pn - P).cwiseAbs().maxCoeff();
    P = 0.5 * (Pn + Pn.transpose());
    if (change <= 1e-10 * std::max(1.0, P.cwiseAbs().maxCoeff())) break;
  }
  const Matrix12d Jinv = J.inverse();
  Matrix12d W = Jinv.transpose() * P * Jinv;
  return 0.5 * (W + W.transpose());
}

}  // namespace cablelift
