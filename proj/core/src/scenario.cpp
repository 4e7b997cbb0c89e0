#include "weakgrid/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <future>
#include <thread>

namespace weakgrid {

namespace {

using Complex = std::complex<double>;

DqVector to_dq(const Complex& z) { return {z.real(), z.imag()}; }

void require(bool ok, const std::string& what) {
  if (!ok) {
    throw std::invalid_argument(what);
  }
}

double channel_value(const TraceRow& row, TraceChannel ch) {
  switch (ch) {
    case TraceChannel::P:
      return row.p;
    case TraceChannel::Q:
      return row.q;
    case TraceChannel::V:
      return row.v_pcc_dq.norm();
  }
  return 0.0;
}

struct WindowStats {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

WindowStats window_stats(const Trace& trace, TraceChannel ch, double t0, double t1) {
  WindowStats w;
  double sum = 0.0;
  for (const TraceRow& row : trace) {
    if (row.t < t0 || row.t > t1) {
      continue;
    }
    const double v = channel_value(row, ch);
    if (w.count == 0) {
      w.min = v;
      w.max = v;
    }
    w.min = std::min(w.min, v);
    w.max = std::max(w.max, v);
    sum += v;
    ++w.count;
  }
  if (w.count > 0) {
    w.mean = sum / static_cast<double>(w.count);
  }
  return w;
}

}  // namespace

std::string_view to_string(Stability s) {
  switch (s) {
    case Stability::Stable:
      return "stable";
    case Stability::UnstableOscillatory:
      return "unstable-oscillatory";
    case Stability::UnstableDiverged:
      return "unstable-diverged";
  }
  return "unknown";
}

std::string_view to_string(TraceChannel ch) {
  switch (ch) {
    case TraceChannel::P:
      return "p";
    case TraceChannel::Q:
      return "q";
    case TraceChannel::V:
      return "v";
  }
  return "?";
}

long long Scenario::plant_steps_per_tick() const {
  return std::llround(control.t_sample / dt_plant);
}

void Scenario::validate() const {
  base.validate();
  network.validate();
  control.validate();
  fault.validate();
  require(dt_plant > 0.0 && dt_plant <= kMaxPlantStep * (1.0 + 1e-12),
          "timing.dt_plant must lie in (0, 5e-6] s");
  const double ratio = control.t_sample / dt_plant;
  require(std::llround(ratio) >= 1 && std::fabs(ratio - std::llround(ratio)) < 1e-9 * ratio,
          "timing.dt_plant must divide control.t_sample evenly");
  require(t_end >= fault.t_clear(base) + criteria.min_post_fault - 1e-9,
          "timing.t_end must reach criteria.min_post_fault past fault clearance");
  require(delay >= 0.0 && std::isfinite(delay), "sync.delay must be >= 0");
  require(channel_decimation >= 1, "sync.channel_decimation must be >= 1");
  if (delay > 0.0) {
    require(sync_mode == SyncMode::StrongGridSync, "sync.delay applies only to sg synchronization");
    const double period = control.t_sample * channel_decimation;
    const double n = delay / period;
    require(std::fabs(n - std::llround(n)) < 1e-6,
            "sync.delay must be a whole number of channel periods");
  }
  require(std::isfinite(sync_angle_offset), "sync.angle_offset must be finite");
  require(criteria.band > 0.0 && criteria.ripple > 0.0 && criteria.window > 0.0 &&
              criteria.min_post_fault >= criteria.window && criteria.settle_band > 0.0,
          "criteria values must be positive and min_post_fault >= window");
}

std::optional<OperatingPoint> steady_operating_point(const NetworkParams& n,
                                                     const ControlParams& c) {
  const Complex v_sg{kDqPerPeak, 0.0};
  const Complex s_set{c.p_set, c.q_set};
  const Complex z_line{n.r_line, n.x_transformer + n.x_line};
  const Complex y_cap{0.0, 1.0 / std::fabs(n.x_filter_c)};

  // With i_f = S / conj(v): K |v|^2 - v_sg conj(v) = Z S, K = 1 + Z y_cap.
  // Taking magnitudes gives a quadratic in |v|^2; the larger root is the
  // high-voltage (normal) operating point.
  const Complex k = 1.0 + z_line * y_cap;
  const Complex zs = z_line * s_set;
  const double a = std::norm(k);
  const double b = -(2.0 * (k * std::conj(zs)).real() + std::norm(v_sg));
  const double cc = std::norm(zs);
  const double disc = b * b - 4.0 * a * cc;
  if (disc < 0.0) {
    return std::nullopt;
  }
  const double u = (-b + std::sqrt(disc)) / (2.0 * a);
  if (!(u > c.v_min * c.v_min)) {
    return std::nullopt;
  }
  const Complex v = std::conj((k * u - zs) / v_sg);

  OperatingPoint op;
  const Complex i_f = s_set / std::conj(v);
  op.v_pcc = to_dq(v);
  op.i_filter = to_dq(i_f);
  op.i_line = to_dq(i_f - y_cap * v);
  op.u_vsc = to_dq(v + Complex{n.r_filter_parasitic, n.x_filter_l} * i_f);
  return op;
}

OperatingPoint no_load_operating_point(const NetworkParams& n) {
  const Complex v_sg{kDqPerPeak, 0.0};
  const Complex z_line{n.r_line, n.x_transformer + n.x_line};
  const Complex y_cap{0.0, 1.0 / std::fabs(n.x_filter_c)};
  const Complex v = v_sg / (1.0 + z_line * y_cap);
  OperatingPoint op;
  op.v_pcc = to_dq(v);
  op.i_line = to_dq(-y_cap * v);
  op.u_vsc = op.v_pcc;
  return op;
}

RunResult run(const Scenario& s) {
  s.validate();
  const std::optional<OperatingPoint> loaded = steady_operating_point(s.network, s.control);
  const OperatingPoint op = loaded.value_or(no_load_operating_point(s.network));

  // Strong-grid frame at t = 0 coincides with theta = 0.
  const Angle grid_frame{0.0};
  PlantState initial;
  initial.i_filter = dq_to_abc(op.i_filter, grid_frame);
  initial.v_pcc = dq_to_abc(op.v_pcc, grid_frame);
  initial.i_line = dq_to_abc(op.i_line, grid_frame);
  initial.i_line_remote = initial.i_line;
  Plant plant(s.network, s.base, initial);

  const double pcc_angle = std::atan2(op.v_pcc.q, op.v_pcc.d);
  PllState local_pll;
  local_pll.phase = Angle(pcc_angle);
  local_pll.omega = s.base.omega_nominal;

  std::optional<RemoteSync> remote;
  if (s.sync_mode == SyncMode::StrongGridSync) {
    remote.emplace(s.control, s.base, s.delay, s.compensation_enabled, grid_frame,
                   s.channel_decimation);
  }

  // Current-loop integrators preloaded with the steady command in the initial
  // controller frame.
  const double theta0 =
      (s.sync_mode == SyncMode::PccSync ? pcc_angle : 0.0) + s.sync_angle_offset;
  const DqVector integ0 =
      rotate_frame(op.u_vsc - op.v_pcc -
                       DqVector{-s.control.decoupling_reactance * op.i_filter.q,
                                s.control.decoupling_reactance * op.i_filter.d},
                   -theta0);
  ControllerState ctrl;
  ctrl.loop = {integ0.d, integ0.q};
  ctrl.v_filtered = rotate_frame(op.v_pcc, -theta0);

  const long long ratio = s.plant_steps_per_tick();
  const double ts = s.control.t_sample;
  const double dt = s.dt_plant;
  const auto ticks = static_cast<long long>(std::floor(s.t_end / ts + 1e-9));

  RunResult result;
  result.trace.reserve(static_cast<std::size_t>(ticks + 1));

  for (long long k = 0; k <= ticks; ++k) {
    const double t = static_cast<double>(k) * ts;
    const PlantState& x = plant.state();

    Angle sync_angle;
    if (remote) {
      sync_angle = remote->tick(k, strong_grid_voltage(t, s.base));
    } else {
      sync_angle = local_pll.phase;
      local_pll = pll_update(local_pll, x.v_pcc, s.control, s.base);
    }
    sync_angle += s.sync_angle_offset;

    const TickOutput out = controller_tick(x.v_pcc, x.i_filter, sync_angle, ctrl, s.control);
    ctrl = out.state;

    TraceRow row;
    row.t = t;
    row.v_pcc_dq = out.v_o;
    row.i_l_dq = out.i_l;
    const PowerPair pq = instantaneous_power(out.v_o, out.i_l);
    row.p = pq.p;
    row.q = pq.q;
    row.pll_angle = sync_angle;
    row.flags = 0;
    if (out.voltage_floor) {
      row.flags |= kFlagVoltageFloor;
    }
    if (out.saturated) {
      row.flags |= kFlagSaturated;
    }
    result.trace.push_back(row);

    if (k == ticks) {
      break;
    }

    PlantInputs in;
    in.u_vsc = out.u_abc;
    in.fault_location = s.fault.location;
    for (long long j = 0; j < ratio; ++j) {
      const long long n = k * ratio + j;
      const double tn = static_cast<double>(n) * dt;
      // Evaluated mid-step so that window edges land identically for any dt grid.
      in.fault_active = fault_is_active(tn + 0.5 * dt, s.fault, s.base);
      if (plant.advance(tn, dt, in) == StepStatus::Diverged) {
        break;
      }
    }
    if (plant.diverged()) {
      result.trace.back().flags |= kFlagDiverged;
      break;
    }
  }

  result.metrics = compute_metrics(result.trace, s);
  result.metrics.operating_point_found = loaded.has_value();
  return result;
}

Stability classify_stability(const Trace& trace, double t_clear, double p_set, double q_set,
                             const StabilityCriteria& c) {
  for (const TraceRow& row : trace) {
    if ((row.flags & kFlagDiverged) != 0U) {
      return Stability::UnstableDiverged;
    }
  }
  if (trace.empty() || trace.back().t < t_clear + c.min_post_fault - 1e-9) {
    throw InsufficientTrace("trace must extend at least " + std::to_string(c.min_post_fault) +
                            " s past fault clearance");
  }
  const double t1 = trace.back().t;
  const double t0 = t1 - c.window;
  double p_min = 0.0;
  double p_max = 0.0;
  bool first = true;
  for (const TraceRow& row : trace) {
    if (row.t < t0) {
      continue;
    }
    if (!std::isfinite(row.p) || !std::isfinite(row.q) || std::fabs(row.p - p_set) > c.band ||
        std::fabs(row.q - q_set) > c.band) {
      return Stability::UnstableOscillatory;
    }
    p_min = first ? row.p : std::min(p_min, row.p);
    p_max = first ? row.p : std::max(p_max, row.p);
    first = false;
  }
  if (p_max - p_min > c.ripple) {
    return Stability::UnstableOscillatory;
  }
  return Stability::Stable;
}

std::optional<double> settling_time(const Trace& trace, TraceChannel ch, double reference,
                                    double tolerance, double t_clear) {
  if (trace.empty()) {
    return std::nullopt;
  }
  // Walk backwards to the last excursion outside the band.
  std::optional<double> settled_from;
  for (auto it = trace.rbegin(); it != trace.rend(); ++it) {
    if (it->t < t_clear) {
      break;
    }
    const double v = channel_value(*it, ch);
    if (!std::isfinite(v) || std::fabs(v - reference) > tolerance) {
      break;
    }
    settled_from = it->t;
  }
  if (!settled_from) {
    return std::nullopt;
  }
  return std::max(0.0, *settled_from - t_clear);
}

double compute_scr(const NetworkParams& n) {
  return 1.0 / std::abs(Complex{n.r_line, n.x_line + n.x_transformer});
}

Metrics compute_metrics(const Trace& trace, const Scenario& s) {
  Metrics m;
  m.scr = compute_scr(s.network);
  const double t_start = s.fault.t_start;
  const double t_clear = s.fault.t_clear(s.base);
  const double p_set = s.control.p_set;
  const double q_set = s.control.q_set;

  const double pre0 = std::max(0.0, t_start - 0.1);
  const double pre1 = t_start - 0.5 * s.control.t_sample;
  m.prefault_p = window_stats(trace, TraceChannel::P, pre0, pre1).mean;
  m.prefault_q = window_stats(trace, TraceChannel::Q, pre0, pre1).mean;
  m.prefault_v = window_stats(trace, TraceChannel::V, pre0, pre1).mean;

  for (const TraceRow& row : trace) {
    if ((row.flags & kFlagVoltageFloor) != 0U) {
      ++m.voltage_floor_ticks;
    }
  }

  m.stable = classify_stability(trace, t_clear, p_set, q_set, s.criteria);

  if (!trace.empty()) {
    const double t1 = trace.back().t;
    m.steady_p = window_stats(trace, TraceChannel::P, t1 - s.criteria.window, t1).mean;
    m.steady_q = window_stats(trace, TraceChannel::Q, t1 - s.criteria.window, t1).mean;
    const WindowStats post = window_stats(trace, TraceChannel::P, t_clear, t1);
    m.overshoot_p = post.count > 0 ? post.max - p_set : 0.0;
  }

  const double band = s.criteria.settle_band;
  m.settle_time_p = settling_time(trace, TraceChannel::P, p_set, band, t_clear);
  m.settle_time_q = settling_time(trace, TraceChannel::Q, q_set, band, t_clear);
  m.settle_time_v =
      settling_time(trace, TraceChannel::V, m.prefault_v, band * m.prefault_v, t_clear);
  return m;
}

std::vector<double> linspace(double lo, double hi, int steps) {
  require(steps >= 2, "sweep steps must be >= 2");
  std::vector<double> out(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (steps - 1);
  }
  out.back() = hi;
  return out;
}

SweepResult impedance_sweep(const Scenario& templ, const std::vector<double>& x_values,
                            unsigned threads) {
  for (std::size_t i = 1; i < x_values.size(); ++i) {
    require(x_values[i] > x_values[i - 1], "sweep x values must be increasing");
  }
  const double r_over_x = templ.network.r_line / templ.network.x_line;

  std::vector<Scenario> jobs;
  for (double x : x_values) {
    for (SyncMode mode : {SyncMode::PccSync, SyncMode::StrongGridSync}) {
      Scenario s = templ;
      s.network.x_line = x;
      s.network.r_line = x * r_over_x;
      s.sync_mode = mode;
      if (mode == SyncMode::PccSync) {
        s.delay = 0.0;
        s.compensation_enabled = false;
      }
      jobs.push_back(s);
    }
  }

  if (threads == 0) {
    threads = std::max(1U, std::thread::hardware_concurrency());
  }
  std::vector<Stability> outcome(jobs.size());
  auto classify = [](const Scenario& s) { return run(s).metrics.stable; };
  for (std::size_t start = 0; start < jobs.size(); start += threads) {
    std::vector<std::future<Stability>> batch;
    const std::size_t stop = std::min(jobs.size(), start + threads);
    for (std::size_t i = start; i < stop; ++i) {
      batch.push_back(std::async(std::launch::async, classify, std::cref(jobs[i])));
    }
    for (std::size_t i = start; i < stop; ++i) {
      outcome[i] = batch[i - start].get();
    }
  }

  SweepResult result;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    result.rows.push_back(
        {jobs[i].network.x_line, jobs[i].network.r_line, jobs[i].sync_mode, outcome[i]});
  }
  for (std::size_t i = 0; i + 1 < result.rows.size(); i += 2) {
    const bool pcc_ok = result.rows[i].stability == Stability::Stable;
    const bool sg_ok = result.rows[i + 1].stability == Stability::Stable;
    if (!pcc_ok && sg_ok && !result.crossover) {
      result.crossover = result.rows[i].x_line;
    }
    if (pcc_ok && !sg_ok) {
      result.dominance_violated = true;
    }
  }
  return result;
}

namespace presets {

Scenario case_a() {
  Scenario s;
  s.label = "case_a";
  s.network.r_line = 0.01298;
  s.network.x_line = 0.1298;
  return s;
}

Scenario case_b() {
  Scenario s;
  s.label = "case_b";
  s.network.r_line = 0.05193;
  s.network.x_line = 0.5193;
  return s;
}

Scenario case_c() {
  Scenario s = case_b();
  s.label = "case_c";
  s.delay = 0.01;
  s.compensation_enabled = true;
  return s;
}

Scenario by_name(std::string_view name) {
  if (name == "case_a") {
    return case_a();
  }
  if (name == "case_b") {
    return case_b();
  }
  if (name == "case_c") {
    return case_c();
  }
  throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
}

std::vector<std::string> names() { return {"case_a", "case_b", "case_c"}; }

}  // namespace presets

}  // namespace weakgrid
