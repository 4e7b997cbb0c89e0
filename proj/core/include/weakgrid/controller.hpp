#pragma once

#include "weakgrid/units_frames.hpp"

namespace weakgrid {

struct ControlParams {
  double kp_pll = 0.3;
  double ki_pll = 100.0;
  double kp_current = 50.0;
  double ki_current = 2000.0;
  double p_set = 1.0;
  double q_set = -0.2;
  double t_sample = 5e-5;
  double u_max = 2.0;   // phase peak; dq limit is u_max * sqrt(3/2)
  double v_min = 0.05;  // floor on |v_o| in the power controller
  double i_max = 2.0;   // current reference magnitude clamp (dq)
  double decoupling_reactance = 0.0;  // 0 disables the +-wL cross terms
  /// First-order low-pass on the voltage fed to the power controller, rad/s.
  double voltage_filter_cutoff = 31.4;

  void validate() const;

  [[nodiscard]] double u_limit_dq() const { return u_max * kDqPerPeak; }
};

/// SRF-PLL. Gains act on the raw q-axis voltage and produce a per-unit
/// frequency deviation: omega = omega_N * (1 + kp * e + integrator).
struct PllState {
  Angle phase;
  double integrator = 0.0;  // per-unit frequency
  double omega = 0.0;       // last frequency used, rad/s
  double error = 0.0;       // last q-axis error
};

struct CurrentLoopState {
  double integ_d = 0.0;
  double integ_q = 0.0;
};

/// Full controller memory between samples.
struct ControllerState {
  CurrentLoopState loop;
  DqVector v_filtered;  // power-controller voltage, controller frame
};

/// One step of the power-controller voltage filter.
DqVector filter_voltage(const DqVector& previous, const DqVector& measured,
                        const ControlParams& p);

/// Advances the PLL by one sample. The q-axis error is taken against the phase
/// held on entry.
PllState pll_update(const PllState& s, const ThreePhaseSample& v_sync, const ControlParams& p,
                    const PerUnitBase& base);

struct CurrentReference {
  DqVector i_ref;
  bool voltage_floor = false;  // |v_o| < v_min, denominator floored
  bool clamped = false;        // |i_ref| limited to i_max
};

/// Power controller: i* = v (P* + jQ*) / |v|^2, i.e. the unique current giving
/// (P*, Q*) under instantaneous_power.
CurrentReference current_references(const DqVector& v_o, double p_set, double q_set,
                                     double v_min = 0.05, double i_max = 2.0);

struct CurrentLoopOutput {
  DqVector u_cmd;
  CurrentLoopState state;
  bool saturated = false;
};

/// PI current loop with measured-voltage feedforward. Integration stops on an
/// axis while the magnitude limiter is active and that axis's error would push
/// the command further out.
CurrentLoopOutput current_loop(const DqVector& v_o, const DqVector& i_l, const DqVector& i_ref,
                               const CurrentLoopState& s, const ControlParams& p);

struct TickOutput {
  ThreePhaseSample u_abc;
  DqVector v_o;
  DqVector i_l;
  DqVector i_ref;
  ControllerState state;
  bool voltage_floor = false;
  bool saturated = false;
};

/// One control sample: measurements to dq at sync_angle, filtered voltage into
/// the power controller, current loop, and back to abc with the same angle.
TickOutput controller_tick(const ThreePhaseSample& meas_v_o, const ThreePhaseSample& meas_i_l,
                           Angle sync_angle, const ControllerState& s, const ControlParams& p);

}  // namespace weakgrid
