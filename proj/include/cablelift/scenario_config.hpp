#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cablelift/cable_control.hpp"
#include "cablelift/event_trigger.hpp"
#include "cablelift/metrics.hpp"
#include "cablelift/payload_ocp.hpp"
#include "cablelift/plant.hpp"
#include "cablelift/sqp_solver.hpp"

namespace cablelift {

inline constexpr int kSchemaVersion = 1;

enum class ReferenceKind { circle, hover, waypoints };
enum class PlantKind { full, payload_only };

struct ReferenceSpec {
  ReferenceKind kind = ReferenceKind::circle;
  double radius = 1.0;   // m
  double period = 15.0;  // s
  double height = 0.5;   // m
  Vec3 hover_position = Vec3(0.0, 0.0, 0.5);
  std::vector<std::pair<double, Vec3>> waypoints;  // (t, position), linear in between
};

struct ScenarioConfig {
  std::string name = "circle";
  SystemParams system;
  ReferenceSpec reference;
  Vec3 initial_offset = Vec3::Zero();  // payload offset from the t = 0 reference
  double duration = 15.0;

  std::string trigger_preset = "medium";
  TriggerConfig trigger;
  double terminal_epsilon = 0.05;
  int horizon_floor = 2;

  int horizon = 20;
  double nmpc_dt = 0.05;
  CostWeights weights;
  bool terminal_from_lqr = true;  // Q_XN from the hover Riccati equation
  double funnel_weight = 1e3;
  bool ocp_funnel = true;
  bool ocp_tension_bound = true;
  SolverConfig solver;

  GainSet gains;
  DisturbanceModel disturbance;
  std::optional<Obstacle> obstacle;
  FunnelSet funnels;

  bool redistribute = true;
  double d_safe = 0.4;
  double lambda_sep = 10.0;

  double control_dt = 0.002;
  int plant_substeps = 2;
  PlantKind plant = PlantKind::full;
  std::uint64_t seed = 1;
  bool record_timing = false;

  /// NMPC period in low-level ticks; throws ConfigError if not an integer.
  int ticks_per_nmpc() const;
  /// Throws ConfigError on any inconsistent or non-physical setting.
  void validate() const;
};

SystemParams default_system();
CostWeights default_weights();

/// Built-in scenarios: circle, hover, hover_recovery, circle_payload_only,
/// hover_recovery_payload_only.
ScenarioConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();
std::string preset_description(const std::string& name);

/// INI text with a [scenario] schema_version key. Starts from the preset
/// named in [scenario] preset (default circle). Unknown keys are errors.
ScenarioConfig parse_config(std::istream& in);
ScenarioConfig load_config(const std::string& path);

/// Sets trigger parameters from a named preset, keeping sigma/mode knobs.
void apply_trigger_preset(ScenarioConfig& config, const std::string& preset);

/// Infinite-horizon cost-to-go of the hover linearization, in error
/// coordinates, for use as the terminal weight.
Matrix12d lqr_terminal_weight(const PayloadModel& model, const Matrix12d& Q_X,
                              const Matrix6d& Q_U, double dt);

}  // namespace cablelift
