#include "weakgrid/controller.hpp"

#include <algorithm>
#include <stdexcept>

namespace weakgrid {

void ControlParams::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(what);
    }
  };
  positive(kp_pll, "control.kp_pll must be > 0");
  positive(ki_pll, "control.ki_pll must be > 0");
  positive(kp_current, "control.kp_current must be > 0");
  positive(ki_current, "control.ki_current must be > 0");
  positive(t_sample, "control.t_sample must be > 0");
  positive(v_min, "control.v_min must be > 0");
  positive(i_max, "control.i_max must be > 0");
  if (!(u_max > 1.0)) {
    throw std::invalid_argument("control.u_max must be > 1");
  }
  if (!std::isfinite(p_set) || !std::isfinite(q_set)) {
    throw std::invalid_argument("control.p_set/q_set must be finite");
  }
  if (!(voltage_filter_cutoff >= 0.0)) {
    throw std::invalid_argument("control.voltage_filter_cutoff must be >= 0");
  }
  if (!(decoupling_reactance >= 0.0)) {
    throw std::invalid_argument("control.decoupling_reactance must be >= 0");
  }
}

PllState pll_update(const PllState& s, const ThreePhaseSample& v_sync, const ControlParams& p,
                    const PerUnitBase& base) {
  PllState next = s;
  next.error = abc_to_dq(v_sync, s.phase).q;
  next.integrator = s.integrator + p.ki_pll * next.error * p.t_sample;
  next.omega = base.omega_nominal * (1.0 + p.kp_pll * next.error + next.integrator);
  next.phase = s.phase + next.omega * p.t_sample;
  return next;
}

CurrentReference current_references(const DqVector& v_o, double p_set, double q_set,
                                     double v_min, double i_max) {
  CurrentReference r;
  double denom = v_o.norm_squared();
  const double floor = v_min * v_min;
  if (denom < floor) {
    denom = floor;
    r.voltage_floor = true;
  }
  r.i_ref = {(v_o.d * p_set - v_o.q * q_set) / denom, (v_o.q * p_set + v_o.d * q_set) / denom};
  const double mag = r.i_ref.norm();
  if (mag > i_max) {
    r.i_ref = (i_max / mag) * r.i_ref;
    r.clamped = true;
  }
  return r;
}

CurrentLoopOutput current_loop(const DqVector& v_o, const DqVector& i_l, const DqVector& i_ref,
                               const CurrentLoopState& s, const ControlParams& p) {
  const DqVector e = i_ref - i_l;
  const DqVector cross{-p.decoupling_reactance * i_l.q, p.decoupling_reactance * i_l.d};
  const DqVector unsat =
      v_o + cross + p.kp_current * e + DqVector{s.integ_d, s.integ_q};

  CurrentLoopOutput out;
  out.u_cmd = unsat;
  const double limit = p.u_limit_dq();
  const double mag = unsat.norm();
  if (mag > limit) {
    out.u_cmd = (limit / mag) * unsat;
    out.saturated = true;
  }

  const double step = p.ki_current * p.t_sample;
  out.state = s;
  if (!(out.saturated && e.d * unsat.d > 0.0)) {
    out.state.integ_d += step * e.d;
  }
  if (!(out.saturated && e.q * unsat.q > 0.0)) {
    out.state.integ_q += step * e.q;
  }
  const double integ_mag = std::hypot(out.state.integ_d, out.state.integ_q);
  if (integ_mag > limit) {
    out.state.integ_d *= limit / integ_mag;
    out.state.integ_q *= limit / integ_mag;
  }
  return out;
}

DqVector filter_voltage(const DqVector& previous, const DqVector& measured,
                        const ControlParams& p) {
  if (p.voltage_filter_cutoff == 0.0) {
    return measured;
  }
  const double wt = p.voltage_filter_cutoff * p.t_sample;
  return previous + (wt / (1.0 + wt)) * (measured - previous);
}

TickOutput controller_tick(const ThreePhaseSample& meas_v_o, const ThreePhaseSample& meas_i_l,
                           Angle sync_angle, const ControllerState& s, const ControlParams& p) {
  TickOutput out;
  out.v_o = abc_to_dq(meas_v_o, sync_angle);
  out.i_l = abc_to_dq(meas_i_l, sync_angle);
  out.state.v_filtered = filter_voltage(s.v_filtered, out.v_o, p);
  const CurrentReference ref =
      current_references(out.state.v_filtered, p.p_set, p.q_set, p.v_min, p.i_max);
  out.i_ref = ref.i_ref;
  out.voltage_floor = ref.voltage_floor;
  const CurrentLoopOutput loop = current_loop(out.v_o, out.i_l, ref.i_ref, s.loop, p);
  out.state.loop = loop.state;
  out.saturated = loop.saturated;
  out.u_abc = dq_to_abc(loop.u_cmd, sync_angle);
  return out;
}

}  // namespace weakgrid
