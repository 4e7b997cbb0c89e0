#pragma once

#include "weakgrid/units_frames.hpp"

namespace weakgrid {

/// Network impedances in per-unit at nominal frequency.
struct NetworkParams {
  double x_filter_l = 1.442;
  double x_filter_c = -182.7;  // capacitive, stored negative
  double x_transformer = 0.05;
  double r_line = 0.01298;
  double x_line = 0.1298;
  double r_load = 0.25;
  double r_fault = 0.01;
  double r_filter_parasitic = 0.005;

  void validate() const;

  [[nodiscard]] double filter_inductance(const PerUnitBase& base) const {
    return x_filter_l / base.omega_nominal;
  }
  [[nodiscard]] double filter_capacitance(const PerUnitBase& base) const {
    return 1.0 / (base.omega_nominal * std::fabs(x_filter_c));
  }
  /// Transformer leakage lumped with the line.
  [[nodiscard]] double line_inductance(const PerUnitBase& base) const {
    return (x_transformer + x_line) / base.omega_nominal;
  }
};

/// Continuous plant states. `i_line` is the current leaving the PCC into the
/// transformer/line; `i_line_remote` is the current arriving at the strong-grid
/// bus. The two are equal unless a fault sits strictly inside the line.
struct PlantState {
  ThreePhaseSample i_filter;
  ThreePhaseSample v_pcc;
  ThreePhaseSample i_line;
  ThreePhaseSample i_line_remote;

  [[nodiscard]] bool finite() const;
  [[nodiscard]] double max_abs() const;

  friend PlantState operator+(const PlantState& x, const PlantState& y);
  friend PlantState operator*(double k, const PlantState& x);
  friend bool operator==(const PlantState&, const PlantState&) = default;
};

/// Time derivative of PlantState, same layout.
using PlantDerivative = PlantState;

struct FaultWindow {
  double t_start = 1.0;
  double duration_cycles = 10.0;
  double location = 0.0;  // fraction of the series impedance from the PCC end

  void validate() const;
  [[nodiscard]] double t_clear(const PerUnitBase& base) const {
    return t_start + duration_cycles / base.f_nominal;
  }
};

/// Half-open window [t_start, t_start + cycles / f_nominal).
bool fault_is_active(double t, const FaultWindow& w, const PerUnitBase& base);

/// Rigid balanced source, 1 pu phase peak, phase a = cos(omega_N t).
ThreePhaseSample strong_grid_voltage(double t, const PerUnitBase& base);

PlantDerivative derivatives(const PlantState& state, const ThreePhaseSample& u_vsc,
                            const ThreePhaseSample& v_sg, const NetworkParams& params,
                            const PerUnitBase& base, bool fault_active,
                            double fault_location);

struct PlantInputs {
  ThreePhaseSample u_vsc;
  bool fault_active = false;
  double fault_location = 0.0;
  bool grid_energized = true;  // false shorts the strong-grid source (tests)
};

enum class StepStatus { Ok, Diverged };

struct StepResult {
  PlantState state;
  StepStatus status = StepStatus::Ok;
};

inline constexpr double kMaxPlantStep = 5e-6;
inline constexpr double kDivergenceLimit = 100.0;

/// Number of equal RK4 sub-steps used for a plant step of dt: 1 normally,
/// ceil(2 dt / (r_fault C_f)) while a PCC fault is applied.
int rk4_substeps(double dt, const PlantInputs& in, const NetworkParams& params,
                 const PerUnitBase& base);

/// One classical RK4 step with inputs held over [t, t + dt]; the strong-grid
/// source is evaluated at the stage times. Throws std::invalid_argument if dt is
/// outside (0, 5 us].
StepResult step(const PlantState& state, double t, double dt, const PlantInputs& in,
                const NetworkParams& params, const PerUnitBase& base);

/// Sum of 1/2 L i^2 + 1/2 C v^2 over all storage elements.
double stored_energy(const PlantState& state, const NetworkParams& params,
                     const PerUnitBase& base, double fault_location = 0.0);

/// Mutable plant instance. Handles the flux-conserving merge of the two line
/// segment currents when an in-line fault clears.
class Plant {
 public:
  Plant(NetworkParams params, PerUnitBase base, PlantState initial = {});

  StepStatus advance(double t, double dt, const PlantInputs& in);

  [[nodiscard]] const PlantState& state() const { return state_; }
  [[nodiscard]] const NetworkParams& params() const { return params_; }
  [[nodiscard]] bool diverged() const { return diverged_; }

 private:
  NetworkParams params_;
  PerUnitBase base_;
  PlantState state_;
  bool fault_was_active_ = false;
  double last_fault_location_ = 0.0;
  bool diverged_ = false;
};

}  // namespace weakgrid
