// weakgrid: run, compare, sweep and validate from the command line.
//
// Exit codes: 0 completed (whatever the stability classification), 1 validate
// failure, 2 configuration error, 3 file I/O error.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "weakgrid/io.hpp"
#include "weakgrid/scenario.hpp"
#include "weakgrid/validation.hpp"

namespace fs = std::filesystem;
using namespace weakgrid;

namespace {

constexpr int kExitValidate = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct CommonArgs {
  std::string preset;
  std::string config;
  std::string sync;
  std::optional<double> delay;
  bool compensate = false;
  std::optional<double> fault_cycles;
  std::optional<double> dt;
  std::string out;
  std::uint64_t seed = 0;
};

void add_source_options(CLI::App* cmd, CommonArgs& a) {
  auto* preset = cmd->add_option("--preset", a.preset, "case_a, case_b or case_c");
  auto* config = cmd->add_option("--config", a.config, "JSON scenario file");
  preset->excludes(config);
  cmd->add_option("--delay", a.delay, "sync channel delay, s");
  cmd->add_flag("--compensate", a.compensate, "enable delay compensation");
  cmd->add_option("--fault-cycles", a.fault_cycles, "fault duration in cycles");
  cmd->add_option("--dt", a.dt, "plant step, s");
  cmd->add_option("--out", a.out, "output directory (else $WEAKGRID_OUT, else ./weakgrid-out)");
  cmd->add_option("--seed", a.seed, "reserved; the simulator is deterministic");
}

Scenario load(const CommonArgs& a, bool allow_sync_override) {
  Scenario s;
  if (!a.config.empty()) {
    s = io::load_scenario(a.config);
  } else {
    try {
      s = presets::by_name(a.preset.empty() ? "case_a" : a.preset);
    } catch (const std::invalid_argument& e) {
      throw io::ConfigError(e.what());
    }
  }
  io::Overrides o;
  if (allow_sync_override && !a.sync.empty()) {
    o.sync = parse_sync_mode(a.sync);
  }
  o.delay = a.delay;
  if (a.compensate) {
    o.compensate = true;
  }
  o.fault_cycles = a.fault_cycles;
  o.dt = a.dt;
  io::apply_overrides(s, o);
  if (s.delay >= 1.0 / s.base.f_nominal) {
    std::cerr << "warning: delay " << s.delay
              << " s is at least one cycle; compensation relies on timestamps to resolve "
                 "whole cycles\n";
  }
  return s;
}

fs::path output_dir(const CommonArgs& a) {
  if (!a.out.empty()) {
    return a.out;
  }
  if (const char* env = std::getenv("WEAKGRID_OUT"); env != nullptr && *env != '\0') {
    return env;
  }
  return "weakgrid-out";
}

std::string stem(const Scenario& s) { return s.label + "_" + std::string(to_string(s.sync_mode)); }

int cmd_run(const CommonArgs& a) {
  const Scenario s = load(a, true);
  const RunResult r = run(s);
  const fs::path dir = output_dir(a);
  io::write_trace_file(dir / (stem(s) + ".csv"), r.trace);
  const std::string text = io::metrics_to_text(r.metrics, s);
  io::write_text_file(dir / (stem(s) + "_metrics.txt"), text);
  io::write_text_file(dir / (stem(s) + "_metrics.json"), io::metrics_to_json(r.metrics, s));
  std::cout << text << "trace           " << (dir / (stem(s) + ".csv")).string() << '\n';
  return 0;
}

int cmd_compare(const CommonArgs& a) {
  Scenario base = load(a, false);
  Scenario pcc = base;
  pcc.sync_mode = SyncMode::PccSync;
  pcc.delay = 0.0;
  pcc.compensation_enabled = false;
  Scenario sg = base;
  sg.sync_mode = SyncMode::StrongGridSync;
  io::validate(pcc);
  io::validate(sg);

  const RunResult rp = run(pcc);
  const RunResult rs = run(sg);
  const fs::path dir = output_dir(a);
  io::write_trace_file(dir / (stem(pcc) + ".csv"), rp.trace);
  io::write_trace_file(dir / (stem(sg) + ".csv"), rs.trace);
  const std::string report = io::compare_report_text(base, rp.metrics, rs.metrics);
  io::write_text_file(dir / (base.label + "_compare.txt"), report);
  io::write_text_file(dir / (base.label + "_compare.json"),
                      io::compare_report_json(base, rp.metrics, rs.metrics));
  std::cout << report;
  return 0;
}

int cmd_sweep(const CommonArgs& a, double x_min, double x_max, int steps, unsigned threads) {
  if (!(x_min < x_max)) {
    throw io::ConfigError("sweep: x_min must be < x_max");
  }
  if (!(x_min > 0.0)) {
    throw io::ConfigError("sweep: x_min must be > 0");
  }
  if (steps < 2) {
    throw io::ConfigError("sweep: steps must be >= 2");
  }
  const Scenario s = load(a, false);
  const SweepResult r = impedance_sweep(s, linspace(x_min, x_max, steps), threads);
  const fs::path dir = output_dir(a);
  std::ostringstream table;
  io::write_sweep_csv(table, r);
  io::write_text_file(dir / (s.label + "_sweep.csv"), table.str());
  io::write_text_file(dir / (s.label + "_sweep.json"), io::sweep_summary_json(r));
  std::cout << table.str();
  if (r.crossover) {
    std::cout << "crossover x_line " << *r.crossover << '\n';
  } else {
    std::cout << "crossover none\n";
  }
  if (r.dominance_violated) {
    std::cout << "note: some x_line has pcc stable while sg is unstable\n";
  }
  return 0;
}

int cmd_validate(std::uint64_t seed) {
  const auto reports = validation::run_all(seed);
  std::cout << validation::format(reports);
  for (const auto& r : reports) {
    if (!r.ok()) {
      return kExitValidate;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grid-following converter simulator: weak-grid synchronization studies"};
  app.require_subcommand(1);

  CommonArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "simulate one scenario");
  add_source_options(run_cmd, run_args);
  run_cmd->add_option("--sync", run_args.sync, "synchronization source")
      ->check(CLI::IsMember({"pcc", "sg"}));

  CommonArgs cmp_args;
  auto* cmp_cmd = app.add_subcommand("compare", "run both sync modes on the same plant");
  add_source_options(cmp_cmd, cmp_args);

  CommonArgs sweep_args;
  double x_min = 0.13;
  double x_max = 1.0;
  int steps = 9;
  unsigned threads = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "classify both modes over a line reactance range");
  add_source_options(sweep_cmd, sweep_args);
  sweep_cmd->add_option("--x-min", x_min, "smallest x_line, pu");
  sweep_cmd->add_option("--x-max", x_max, "largest x_line, pu");
  sweep_cmd->add_option("--steps", steps, "grid points including both ends");
  sweep_cmd->add_option("--threads", threads, "worker threads (0 = hardware)");

  std::uint64_t validate_seed = 1;
  auto* val_cmd = app.add_subcommand("validate", "run the fast property suites");
  val_cmd->add_option("--seed", validate_seed, "seed for the random samples");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      return cmd_run(run_args);
    }
    if (cmp_cmd->parsed()) {
      return cmd_compare(cmp_args);
    }
    if (sweep_cmd->parsed()) {
      return cmd_sweep(sweep_args, x_min, x_max, steps, threads);
    }
    if (val_cmd->parsed()) {
      return cmd_validate(validate_seed);
    }
  } catch (const io::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const io::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return 0;
}
