#include "weakgrid/plant.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace weakgrid {

namespace {

void require(bool ok, const char* what) {
  if (!ok) {
    throw std::invalid_argument(what);
  }
}

double sum_squares(const ThreePhaseSample& x) { return x.a * x.a + x.b * x.b + x.c * x.c; }

// Fault positions closer than this to either end are treated as the end itself;
// a shorter inductive segment would make the fault node too stiff for RK4.
constexpr double kEndSnap = 1e-3;

}  // namespace

void NetworkParams::validate() const {
  require(x_filter_l > 0.0, "network.x_filter_l must be > 0");
  require(x_filter_c < 0.0, "network.x_filter_c must be < 0 (capacitive)");
  require(x_transformer >= 0.0, "network.x_transformer must be >= 0");
  require(r_line >= 0.0, "network.r_line must be >= 0");
  require(x_line > 0.0, "network.x_line must be > 0");
  require(r_load > 0.0, "network.r_load must be > 0");
  require(r_fault > 0.0, "network.r_fault must be > 0");
  require(r_filter_parasitic >= 0.0, "network.r_filter_parasitic must be >= 0");
}

void FaultWindow::validate() const {
  require(t_start >= 0.0, "fault.t_start must be >= 0");
  require(duration_cycles > 0.0, "fault.duration_cycles must be > 0");
  require(location >= 0.0 && location <= 1.0, "fault.location must lie in [0, 1]");
}

bool PlantState::finite() const {
  return i_filter.finite() && v_pcc.finite() && i_line.finite() && i_line_remote.finite();
}

double PlantState::max_abs() const {
  return std::fmax(std::fmax(i_filter.max_abs(), v_pcc.max_abs()),
                   std::fmax(i_line.max_abs(), i_line_remote.max_abs()));
}

PlantState operator+(const PlantState& x, const PlantState& y) {
  return {x.i_filter + y.i_filter, x.v_pcc + y.v_pcc, x.i_line + y.i_line,
          x.i_line_remote + y.i_line_remote};
}

PlantState operator*(double k, const PlantState& x) {
  return {k * x.i_filter, k * x.v_pcc, k * x.i_line, k * x.i_line_remote};
}

bool fault_is_active(double t, const FaultWindow& w, const PerUnitBase& base) {
  return t >= w.t_start && t < w.t_clear(base);
}

ThreePhaseSample strong_grid_voltage(double t, const PerUnitBase& base) {
  const double th = base.omega_nominal * t;
  constexpr double shift = kTwoPi / 3.0;
  return {std::cos(th), std::cos(th - shift), std::cos(th + shift)};
}

PlantDerivative derivatives(const PlantState& s, const ThreePhaseSample& u_vsc,
                            const ThreePhaseSample& v_sg, const NetworkParams& p,
                            const PerUnitBase& base, bool fault_active,
                            double fault_location) {
  const double lf = p.filter_inductance(base);
  const double cf = p.filter_capacitance(base);
  const double ll = p.line_inductance(base);

  PlantDerivative d;
  d.i_filter = (1.0 / lf) * (u_vsc - s.v_pcc - p.r_filter_parasitic * s.i_filter);

  const bool at_pcc = fault_active && fault_location <= kEndSnap;
  const bool in_line =
      fault_active && fault_location > kEndSnap && fault_location < 1.0 - kEndSnap;

  if (in_line) {
    const double alpha = fault_location;
    const ThreePhaseSample v_node = p.r_fault * (s.i_line - s.i_line_remote);
    d.v_pcc = (1.0 / cf) * (s.i_filter - s.i_line);
    d.i_line = (1.0 / (alpha * ll)) * (s.v_pcc - v_node - alpha * p.r_line * s.i_line);
    d.i_line_remote = (1.0 / ((1.0 - alpha) * ll)) *
                      (v_node - v_sg - (1.0 - alpha) * p.r_line * s.i_line_remote);
    return d;
  }

  ThreePhaseSample i_shunt{};
  if (at_pcc) {
    i_shunt = (1.0 / p.r_fault) * s.v_pcc;
  }
  d.v_pcc = (1.0 / cf) * (s.i_filter - s.i_line - i_shunt);
  d.i_line = (1.0 / ll) * (s.v_pcc - v_sg - p.r_line * s.i_line);
  d.i_line_remote = (1.0 / ll) * (s.v_pcc - v_sg - p.r_line * s.i_line_remote);
  return d;
}

int rk4_substeps(double dt, const PlantInputs& in, const NetworkParams& params,
                 const PerUnitBase& base) {
  if (!in.fault_active || in.fault_location > kEndSnap) {
    return 1;
  }
  const double rate = 1.0 / (params.r_fault * params.filter_capacitance(base));
  return std::max(1, static_cast<int>(std::ceil(2.0 * dt * rate)));
}

StepResult step(const PlantState& state, double t, double dt, const PlantInputs& in,
                const NetworkParams& params, const PerUnitBase& base) {
  if (!(dt > 0.0) || dt > kMaxPlantStep * (1.0 + 1e-12)) {
    throw std::invalid_argument("plant step dt must lie in (0, 5e-6] s");
  }
  auto source = [&](double time) {
    return in.grid_energized ? strong_grid_voltage(time, base) : ThreePhaseSample{};
  };
  auto f = [&](const PlantState& x, const ThreePhaseSample& v_sg) {
    return derivatives(x, in.u_vsc, v_sg, params, base, in.fault_active, in.fault_location);
  };

  // A fault at the PCC shunts C_f with r_fault; that mode (1 / (r_fault C_f))
  // is far beyond RK4's stability region at the nominal step, so the step is
  // split while it is present.
  const int substeps = rk4_substeps(dt, in, params, base);
  const double h = dt / substeps;

  StepResult r;
  r.state = state;
  for (int m = 0; m < substeps; ++m) {
    const double tm = t + m * h;
    const ThreePhaseSample v0 = source(tm);
    const ThreePhaseSample vh = source(tm + 0.5 * h);
    const ThreePhaseSample v1 = source(tm + h);

    const PlantDerivative k1 = f(r.state, v0);
    const PlantDerivative k2 = f(r.state + (0.5 * h) * k1, vh);
    const PlantDerivative k3 = f(r.state + (0.5 * h) * k2, vh);
    const PlantDerivative k4 = f(r.state + h * k3, v1);
    r.state = r.state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  if (!r.state.finite() || r.state.max_abs() > kDivergenceLimit) {
    r.status = StepStatus::Diverged;
  }
  return r;
}

double stored_energy(const PlantState& s, const NetworkParams& p, const PerUnitBase& base,
                     double fault_location) {
  const double ll = p.line_inductance(base);
  return 0.5 * p.filter_inductance(base) * sum_squares(s.i_filter) +
         0.5 * p.filter_capacitance(base) * sum_squares(s.v_pcc) +
         0.5 * fault_location * ll * sum_squares(s.i_line) +
         0.5 * (1.0 - fault_location) * ll * sum_squares(s.i_line_remote);
}

Plant::Plant(NetworkParams params, PerUnitBase base, PlantState initial)
    : params_(params), base_(base), state_(initial) {
  params_.validate();
}

StepStatus Plant::advance(double t, double dt, const PlantInputs& in) {
  if (diverged_) {
    return StepStatus::Diverged;
  }
  if (fault_was_active_ && !in.fault_active) {
    // Series inductors must carry one current again: conserve total flux.
    const double alpha = last_fault_location_;
    if (alpha > kEndSnap && alpha < 1.0 - kEndSnap) {
      const ThreePhaseSample merged =
          alpha * state_.i_line + (1.0 - alpha) * state_.i_line_remote;
      state_.i_line = merged;
      state_.i_line_remote = merged;
    } else {
      state_.i_line_remote = state_.i_line;
    }
  }
  fault_was_active_ = in.fault_active;
  last_fault_location_ = in.fault_location;

  StepResult r = step(state_, t, dt, in, params_, base_);
  state_ = r.state;
  if (r.status == StepStatus::Diverged) {
    diverged_ = true;
  }
  return r.status;
}

}  // namespace weakgrid
