#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "weakgrid/controller.hpp"
#include "weakgrid/plant.hpp"
#include "weakgrid/sync_link.hpp"
#include "weakgrid/units_frames.hpp"

namespace weakgrid {

/// Thresholds that turn a trace into stable / unstable.
struct StabilityCriteria {
  double band = 0.05;        // |p - P*| and |q - Q*| over the final window, pu
  double ripple = 0.02;      // peak-to-peak p over the final window, pu
  double window = 0.2;       // s
  double min_post_fault = 0.5;  // trace must extend this far past clearance, s
  double settle_band = 0.02;    // settling band, fraction of rated power (p, q) or of pre-fault |v|
};

struct Scenario {
  PerUnitBase base;
  NetworkParams network;
  ControlParams control;
  SyncMode sync_mode = SyncMode::StrongGridSync;
  double delay = 0.0;
  bool compensation_enabled = false;
  FaultWindow fault;
  double t_end = 2.5;
  double dt_plant = 1e-6;
  std::string label = "custom";

  /// Constant offset added to the synchronization angle (frame-invariance runs).
  double sync_angle_offset = 0.0;
  /// Channel sample period as a multiple of t_sample.
  int channel_decimation = 1;
  StabilityCriteria criteria;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  [[nodiscard]] long long plant_steps_per_tick() const;
};

enum TraceFlag : std::uint8_t {
  kFlagVoltageFloor = 1U << 0U,
  kFlagSaturated = 1U << 1U,
  kFlagDiverged = 1U << 2U,
};

struct TraceRow {
  double t = 0.0;
  DqVector v_pcc_dq;  // controller frame
  DqVector i_l_dq;
  double p = 0.0;
  double q = 0.0;
  Angle pll_angle;
  std::uint8_t flags = 0;
};

using Trace = std::vector<TraceRow>;

enum class Stability { Stable, UnstableOscillatory, UnstableDiverged };
std::string_view to_string(Stability s);

struct Metrics {
  Stability stable = Stability::Stable;
  std::optional<double> settle_time_p;  // empty = not settled
  std::optional<double> settle_time_q;
  std::optional<double> settle_time_v;
  double overshoot_p = 0.0;
  double scr = 0.0;
  double steady_p = 0.0;
  double steady_q = 0.0;
  double prefault_p = 0.0;
  double prefault_q = 0.0;
  double prefault_v = 0.0;
  std::size_t voltage_floor_ticks = 0;
  bool operating_point_found = true;
};

struct RunResult {
  Trace trace;
  Metrics metrics;
};

class InsufficientTrace : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Steady operating point of the network with the converter at its set points,
/// as space vectors in the strong-grid frame (grid voltage on the d axis).
struct OperatingPoint {
  DqVector v_pcc;
  DqVector i_filter;
  DqVector i_line;
  DqVector u_vsc;
};

/// Closed-form phasor solution; empty when (P*, Q*) exceeds what the line can
/// carry.
std::optional<OperatingPoint> steady_operating_point(const NetworkParams& n,
                                                     const ControlParams& c);

/// Converter connected but idle (zero filter current).
OperatingPoint no_load_operating_point(const NetworkParams& n);

/// Closed-loop simulation. Starts from the steady operating point, or from
/// no-load when none exists; divergence is recorded in the metrics rather than
/// thrown.
RunResult run(const Scenario& s);

Stability classify_stability(const Trace& trace, double t_clear, double p_set, double q_set,
                             const StabilityCriteria& c = {});

enum class TraceChannel { P, Q, V };
std::string_view to_string(TraceChannel ch);

/// Time after t_clear from which |channel - reference| <= tolerance holds to the
/// end of the trace; empty when it never does.
std::optional<double> settling_time(const Trace& trace, TraceChannel ch, double reference,
                                    double tolerance, double t_clear);

/// 1 / |r_line + j (x_line + x_transformer)|. Not the definition behind the
/// 0.53/0.44 figures quoted for these networks, which could not be reproduced.
double compute_scr(const NetworkParams& n);

Metrics compute_metrics(const Trace& trace, const Scenario& s);

struct SweepRow {
  double x_line = 0.0;
  double r_line = 0.0;
  SyncMode mode = SyncMode::PccSync;
  Stability stability = Stability::Stable;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // ordered by x, pcc before sg
  std::optional<double> crossover;  // smallest x with pcc unstable and sg stable
  bool dominance_violated = false;  // some x with pcc stable but sg unstable
};

/// Runs both sync modes at each x_line, keeping the template's R/X ratio.
/// Entries run on up to `threads` workers; results are merged in input order.
SweepResult impedance_sweep(const Scenario& templ, const std::vector<double>& x_values,
                            unsigned threads = 0);

/// Linearly spaced grid including both ends; steps >= 2.
std::vector<double> linspace(double lo, double hi, int steps);

namespace presets {
Scenario case_a();
Scenario case_b();
Scenario case_c();
/// "case_a", "case_b" or "case_c"; throws std::invalid_argument otherwise.
Scenario by_name(std::string_view name);
std::vector<std::string> names();
}  // namespace presets

}  // namespace weakgrid
