#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "weakgrid/scenario.hpp"

namespace weakgrid::io {

/// Bad configuration: unknown key, wrong type, or a value failing validation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses a JSON scenario document. A top-level "preset" key selects the
/// starting point (defaults to case_a); every other key overrides one field.
/// The result is validated.
Scenario scenario_from_json(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

/// Full document with every key, suitable for scenario_from_json.
std::string scenario_to_json(const Scenario& s);

/// Command-line overrides applied on top of a preset or config file.
struct Overrides {
  std::optional<SyncMode> sync;
  std::optional<double> delay;
  std::optional<bool> compensate;
  std::optional<double> fault_cycles;
  std::optional<double> dt;
};

/// Applies the overrides and re-validates; throws ConfigError.
void apply_overrides(Scenario& s, const Overrides& o);

/// Scenario::validate with std::invalid_argument turned into ConfigError.
void validate(const Scenario& s);

// Trace CSV: t,v_pcc_d,v_pcc_q,i_l_d,i_l_q,p,q,pll_angle,flags
// Flags are ';'-joined tokens from {voltage-floor, saturated, diverged}.
inline constexpr std::string_view kTraceHeader = "t,v_pcc_d,v_pcc_q,i_l_d,i_l_q,p,q,pll_angle,flags";

std::string flags_to_string(std::uint8_t flags);
std::uint8_t flags_from_string(std::string_view text);

void write_trace_csv(std::ostream& out, const Trace& trace);
/// Throws IoError on a bad header, wrong column count, unparsable number or
/// non-increasing t.
Trace read_trace_csv(std::istream& in);

void write_trace_file(const std::filesystem::path& path, const Trace& trace);
Trace read_trace_file(const std::filesystem::path& path);

std::string metrics_to_text(const Metrics& m, const Scenario& s);
std::string metrics_to_json(const Metrics& m, const Scenario& s);

/// Side-by-side report for the two sync modes on the same plant.
std::string compare_report_text(const Scenario& s, const Metrics& pcc, const Metrics& sg);
std::string compare_report_json(const Scenario& s, const Metrics& pcc, const Metrics& sg);

void write_sweep_csv(std::ostream& out, const SweepResult& r);
std::string sweep_summary_json(const SweepResult& r);

/// Writes text to a file, creating parent directories; throws IoError.
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace weakgrid::io
