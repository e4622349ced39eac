#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "cablelift/closed_loop.hpp"
#include "cablelift/errors.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cablelift;
using namespace testing_util;

namespace {

std::string csv_text(const RunLog& log) {
  std::ostringstream s;
  write_csv(log, s);
  return s.str();
}

int count_lines(const std::string& s) {
  return static_cast<int>(std::count(s.begin(), s.end(), '\n'));
}

ScenarioConfig short_run(const std::string& preset, double duration) {
  ScenarioConfig c = preset_config(preset);
  c.duration = duration;
  return c;
}

TickRecord synthetic_tick(int i, double err) {
  TickRecord t;
  t.tick = i;
  t.t = 0.002 * i;
  t.payload_error = err;
  return t;
}

}  // namespace

TEST_CASE("reference_circle") {
  const double T = 15.0;
  const ReferencePoint a = reference_circle(0.0, 1.0, T, 0.5);
  CHECK((a.p_des - Vec3(1.0, 0, 0.5)).norm() < 1e-15);
  const ReferencePoint b = reference_circle(T / 4, 1.0, T, 0.5);
  CHECK((b.p_des - Vec3(0, 1.0, 0.5)).norm() < 1e-12);
  CHECK(b.v_des.norm() == doctest::Approx(2 * std::numbers::pi / T).epsilon(1e-12));
  CHECK(std::abs(b.v_des.norm() - 0.4189) < 1e-4);
  const ReferencePoint c = reference_circle(T, 1.0, T, 0.5);
  CHECK((c.p_des - a.p_des).norm() < 1e-12);
  CHECK((c.v_des - a.v_des).norm() < 1e-12);
  CHECK(a.attitude_des.angularDistance(UnitQuaternion::Identity()) == 0.0);
  CHECK((a.wrench_des.force - Vec3(0, 0, 0.232 * 9.81)).norm() < 1e-12);
  // Velocity is the derivative of position.
  const double h = 1e-6, t = 3.7;
  const Vec3 fd = (reference_circle(t + h, 1.0, T, 0.5).p_des - reference_circle(t - h, 1.0, T, 0.5).p_des) / (2 * h);
  CHECK((fd - reference_circle(t, 1.0, T, 0.5).v_des).norm() < 1e-8);
  CHECK_THROWS_AS(reference_circle(0.0, 1.0, 0.0, 0.5), DomainError);
}

TEST_CASE("one record per control tick") {
  for (const char* preset : {"circle", "hover", "circle_payload_only"}) {
    const RunLog log = run_closed_loop(short_run(preset, 0.1));
    CHECK(log.ticks.size() == 50);
    for (std::size_t i = 1; i < log.ticks.size(); ++i) CHECK(log.ticks[i].t > log.ticks[i - 1].t);
  }
}

TEST_CASE("summarize") {
  RunLog log;
  CHECK_THROWS_AS(summarize(log), EmptyLog);
  log.ticks.push_back(synthetic_tick(0, 0.25));
  CHECK(summarize(log).rms_error == 0.25);
  CHECK(summarize(log).max_error == 0.25);
  log.ticks.push_back(synthetic_tick(1, 0.4));
  log.ticks[0].payload_error = 0.3;
  CHECK(summarize(log).rms_error == doctest::Approx(std::sqrt((0.09 + 0.16) / 2)).epsilon(1e-14));
  CHECK(std::abs(summarize(log).rms_error - 0.3536) < 1e-4);
}

TEST_CASE("csv output") {
  RunLog log;
  log.n_mavs = 4;
  const std::string empty = csv_text(log);
  CHECK(count_lines(empty) == 1);
  CHECK(empty.rfind("t_s,tick,nmpc_step,", 0) == 0);

  const RunLog run = run_closed_loop(short_run("hover", 0.006));
  REQUIRE(run.ticks.size() == 3);
  const std::string text = csv_text(run);
  CHECK(count_lines(text) == 4);
  CHECK(csv_text(run) == text);
  // Every row has as many fields as the header.
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  const auto cols = std::count(line.begin(), line.end(), ',');
  while (std::getline(in, line)) CHECK(std::count(line.begin(), line.end(), ',') == cols);

  const auto dir = std::filesystem::temp_directory_path() / "cablelift_test_csv";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "a.csv").string();
  emit_csv(run, path);
  std::ifstream f(path, std::ios::binary);
  std::stringstream buf;
  buf << f.rdbuf();
  CHECK(buf.str() == text);
  CHECK_THROWS_AS(emit_csv(run, (dir / "missing" / "x.csv").string()), IoError);
  CHECK_THROWS_AS(emit_summary(summarize(run), (dir / "missing" / "x.txt").string()), IoError);
}

TEST_CASE("runs are deterministic") {
  ScenarioConfig c = short_run("circle", 1.0);
  c.trigger = trigger_preset("tight");
  const RunLog a = run_closed_loop(c);
  const RunLog b = run_closed_loop(c);
  CHECK(csv_text(a) == csv_text(b));
  std::ostringstream ea, eb, sa, sb;
  write_events(a, ea);
  write_events(b, eb);
  write_summary(summarize(a), sa);
  write_summary(summarize(b), sb);
  CHECK(ea.str() == eb.str());
  CHECK(sa.str() == sb.str());
  c.seed = c.disturbance.seed = 99;
  CHECK(csv_text(run_closed_loop(c)) != csv_text(a));
}

TEST_CASE("closed-loop bookkeeping") {
  ScenarioConfig c = short_run("circle", 3.0);
  apply_trigger_preset(c, "tight");
  const RunLog log = run_closed_loop(c);
  REQUIRE_FALSE(log.events.empty());
  CHECK(log.events.front().m_k == 0);
  CHECK(log.events.front().type == TriggerDecision::forced);
  for (std::size_t j = 1; j < log.events.size(); ++j) {
    const TriggerEvent& e = log.events[j];
    CHECK(e.m_k <= e.horizon_before);
    if (e.type == TriggerDecision::event) CHECK(e.m_k >= c.trigger.sigma);
    if (e.type == TriggerDecision::forced) CHECK(e.m_k == e.horizon_before);
    CHECK(e.k == log.events[j - 1].k + e.m_k);
  }
  CHECK(log.sigma_violations == 0);
  CHECK(log.chain_violations == 0);
  CHECK(log.open_loop_mismatches == 0);
  // Between NMPC ticks the applied wrench is held.
  for (std::size_t i = 1; i < log.ticks.size(); ++i) {
    if (log.ticks[i].nmpc_step < 0) {
      CHECK(log.ticks[i].wrench.vector() == log.ticks[i - 1].wrench.vector());
    }
  }
  // Prediction index counts NMPC steps since the last execution.
  for (const auto& t : log.ticks) {
    CHECK(t.prediction_index >= 0);
    CHECK(t.prediction_index < t.horizon);
  }
}

TEST_CASE("hover keeps the formation") {
  const RunLog log = run_closed_loop(short_run("hover", 2.0));
  const Summary s = summarize(log);
  const auto init = pair_separations(log.ticks.front().state);
  double min_init = 1e9;
  for (double d : init) min_init = std::min(min_init, d);
  CHECK(std::abs(s.min_separation - min_init) < 1e-3);
  CHECK(s.event_triggers == 0);
  CHECK(s.max_error < 1e-3);
}

TEST_CASE("config parsing") {
  SUBCASE("minimal file uses the preset") {
    std::istringstream in("[scenario]\nschema_version = 1\npreset = hover\n");
    const ScenarioConfig c = parse_config(in);
    CHECK(c.reference.kind == ReferenceKind::hover);
  }
  SUBCASE("values override the preset") {
    std::istringstream in(
        "[scenario]\nschema_version = 1\nduration = 4\nseed = 7\n"
        "[trigger]\nalpha = 0.3\n"
        "[reference]\nradius = 0.5\n"
        "[ocp]\nq_u = 1 1 1 2 2 2\n");
    const ScenarioConfig c = parse_config(in);
    CHECK(c.duration == 4.0);
    CHECK(c.seed == 7);
    CHECK(c.disturbance.seed == 7);
    CHECK(c.trigger.alpha == 0.3);
    CHECK(c.trigger_preset == "custom");
    CHECK(c.reference.radius == 0.5);
    CHECK(c.weights.Q_U(5, 5) == 2.0);
  }
  SUBCASE("errors") {
    auto fails = [](const std::string& text) {
      std::istringstream in(text);
      CHECK_THROWS_AS(parse_config(in), ConfigError);
    };
    fails("[scenario]\npreset = hover\n");
    fails("[scenario]\nschema_version = 2\n");
    fails("[scenario]\nschema_version = 1\n[trigger]\ngamma = 1\n");
    fails("[scenario]\nschema_version = 1\n[nonsense]\nx = 1\n");
    fails("[scenario]\nschema_version = 1\nduration = -1\n");
    fails("[scenario]\nschema_version = 1\nduration = abc\n");
    fails("[scenario]\nschema_version = 1\npreset = nowhere\n");
    fails("[scenario]\nschema_version = 1\n[ocp]\nq_x = 1 2 3\n");
    fails("[scenario]\nschema_version = 1\n[trigger]\nbeta = 0\n");
  }
  CHECK_THROWS_AS(load_config("/nonexistent/dir/x.ini"), IoError);
}

TEST_CASE("presets") {
  for (const auto& name : preset_names()) {
    const ScenarioConfig c = preset_config(name);
    CHECK_NOTHROW(c.validate());
    CHECK_FALSE(preset_description(name).empty());
    CHECK(c.ticks_per_nmpc() == 25);
  }
  CHECK_THROWS_AS(preset_config("nope"), ConfigError);
  ScenarioConfig c = preset_config("circle");
  apply_trigger_preset(c, "loose");
  CHECK(c.trigger.alpha == 0.20);
  CHECK(c.trigger_preset == "loose");
}

TEST_CASE("terminal weight is the hover Riccati solution") {
  const ScenarioConfig c = preset_config("circle");
  const PayloadModel m = PayloadModel::from(c.system);
  const Matrix12d P = lqr_terminal_weight(m, c.weights.Q_X, c.weights.Q_U, c.nmpc_dt);
  CHECK((P - P.transpose()).norm() < 1e-9 * P.norm());
  Eigen::SelfAdjointEigenSolver<Matrix12d> es(P);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
  // Cost-to-go dominates the stage weight.
  Eigen::SelfAdjointEigenSolver<Matrix12d> diff(P - c.weights.Q_X);
  CHECK(diff.eigenvalues().minCoeff() > -1e-9);
}
