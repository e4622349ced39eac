// cablelift: run, sweep and list the closed-loop cable transport scenarios.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "cablelift/closed_loop.hpp"
#include "cablelift/errors.hpp"

namespace fs = std::filesystem;
using namespace cablelift;

namespace {

struct CommonOptions {
  std::string preset = "circle";
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::string trigger;
  bool timing = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--preset", o.preset, "built-in scenario (see `presets`)");
  cmd->add_option("--config", o.config_path, "INI scenario file; overrides --preset");
  cmd->add_option("--out-dir", o.out_dir, "directory for CSV and summary output");
  cmd->add_option("--seed", o.seed, "disturbance RNG seed");
  cmd->add_option("--trigger", o.trigger, "trigger preset: loose, medium or tight");
  cmd->add_flag("--timing", o.timing, "record wall-clock solve times (output is then not byte-stable)");
}

ScenarioConfig resolve(const CommonOptions& o) {
  ScenarioConfig c = o.config_path.empty() ? preset_config(o.preset) : load_config(o.config_path);
  if (o.seed) {
    c.seed = *o.seed;
    c.disturbance.seed = *o.seed;
  }
  if (!o.trigger.empty()) apply_trigger_preset(c, o.trigger);
  if (o.timing) c.record_timing = true;
  c.validate();
  return c;
}

std::string stem(const ScenarioConfig& c) { return c.name + "_" + c.trigger_preset; }

int cmd_run(const CommonOptions& o) {
  const ScenarioConfig c = resolve(o);
  fs::create_directories(o.out_dir);
  const RunLog log = run_closed_loop(c);
  const Summary s = summarize(log);
  const fs::path base = fs::path(o.out_dir) / stem(c);
  emit_csv(log, base.string() + ".csv");
  emit_events(log, base.string() + "_events.csv");
  emit_summary(s, base.string() + "_summary.txt");
  write_summary(s, std::cout);
  return 0;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::string item;
  for (char ch : text + ",") {
    if (ch == ',') {
      if (!item.empty()) out.push_back(std::stod(item));
      item.clear();
    } else if (ch != ' ') {
      item += ch;
    }
  }
  if (out.empty()) throw ConfigError("sweep: empty parameter grid");
  return out;
}

int cmd_sweep(const CommonOptions& o, const std::string& alphas, const std::string& betas,
              unsigned threads) {
  const ScenarioConfig base = resolve(o);
  const auto A = parse_grid(alphas);
  const auto B = parse_grid(betas);
  struct Job {
    double alpha, beta;
    std::optional<Summary> summary;
    std::string error;
  };
  std::vector<Job> jobs;
  for (double a : A) {
    for (double b : B) jobs.push_back({a, b, std::nullopt, {}});
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      ScenarioConfig c = base;
      c.trigger.alpha = jobs[j].alpha;
      c.trigger.beta = jobs[j].beta;
      c.trigger_preset = "custom";
      try {
        jobs[j].summary = summarize(run_closed_loop(c));
      } catch (const std::exception& e) {
        jobs[j].error = e.what();
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(jobs.size())));
  std::vector<std::thread> pool;
  for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  // Merge only after every run has finished, in grid order.
  fs::create_directories(o.out_dir);
  const std::string path = (fs::path(o.out_dir) / (base.name + "_sweep.csv")).string();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "alpha,beta,nmpc_executions,event_triggers,forced_triggers,rms_error_m,"
         "rms_error_after_transient_m,max_separation_m,mean_m_k,error\n";
  int failures = 0;
  for (const auto& j : jobs) {
    char buf[256];
    if (j.summary) {
      const Summary& s = *j.summary;
      std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%d,%d,%d,%.9g,%.9g,%.9g,%.9g,", j.alpha, j.beta,
                    s.nmpc_executions, s.event_triggers, s.forced_triggers, s.rms_error,
                    s.rms_error_after_transient, s.max_separation, s.mean_m_k);
      out << buf << '\n';
    } else {
      ++failures;
      std::snprintf(buf, sizeof(buf), "%.9g,%.9g,,,,,,,,", j.alpha, j.beta);
      std::string msg = j.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      out << buf << msg << '\n';
    }
  }
  if (!out) throw IoError("write to '" + path + "' failed");
  std::cout << "wrote " << path << " (" << jobs.size() << " runs, " << failures << " failed)\n";
  return failures == 0 ? 0 : 1;
}

int cmd_presets() {
  std::cout << "scenarios:\n";
  for (const auto& n : preset_names()) std::cout << "  " << n << "  " << preset_description(n) << '\n';
  std::cout << "triggers:\n";
  for (const auto& n : trigger_preset_names()) {
    const TriggerConfig t = trigger_preset(n);
    std::cout << "  " << n << "  alpha=" << t.alpha << " beta=" << t.beta << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-triggered NMPC for cable-suspended payload transport"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  auto* run = app.add_subcommand("run", "simulate one scenario and write CSV + summary");
  add_common(run, run_opts);

  CommonOptions sweep_opts;
  std::string alphas = "0.02,0.05,0.1,0.2";
  std::string betas = "0.01,0.05,0.1";
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  auto* sweep = app.add_subcommand("sweep", "grid over trigger alpha x beta");
  add_common(sweep, sweep_opts);
  sweep->add_option("--alphas", alphas, "comma-separated alpha values");
  sweep->add_option("--betas", betas, "comma-separated beta values");
  sweep->add_option("--threads", threads, "worker threads");

  app.add_subcommand("presets", "list built-in scenarios and trigger presets");

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) return cmd_run(run_opts);
    if (sweep->parsed()) return cmd_sweep(sweep_opts, alphas, betas, threads);
    return cmd_presets();
  } catch (const std::exception& e) {
    std::cerr << "cablelift: " << e.what() << '\n';
    return 2;
  }
}
