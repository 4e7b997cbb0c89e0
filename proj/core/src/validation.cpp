#include "weakgrid/validation.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "weakgrid/controller.hpp"
#include "weakgrid/sync_link.hpp"
#include "weakgrid/units_frames.hpp"

namespace weakgrid::validation {

namespace {

constexpr double kTol = 1e-12;

class Checker {
 public:
  explicit Checker(std::string name) : start_(std::chrono::steady_clock::now()) {
    report_.name = std::move(name);
  }

  void check(bool ok, const std::string& what) {
    if (ok) {
      ++report_.passed;
      return;
    }
    ++report_.failed;
    if (report_.first_failure.empty()) {
      report_.first_failure = what;
    }
  }

  SuiteReport finish() {
    report_.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    return report_;
  }

 private:
  SuiteReport report_;
  std::chrono::steady_clock::time_point start_;
};

bool close(double a, double b, double scale) {
  return std::fabs(a - b) <= kTol * std::fmax(1.0, scale);
}

bool close(const DqVector& a, const DqVector& b, double scale) {
  return close(a.d, b.d, scale) && close(a.q, b.q, scale);
}

std::string describe(const char* what, int sample) {
  return std::string(what) + " (sample " + std::to_string(sample) + ")";
}

struct Sampler {
  std::mt19937_64 rng;
  std::uniform_real_distribution<double> unit{-1.0, 1.0};
  std::uniform_real_distribution<double> angle{-kTwoPi, kTwoPi};

  explicit Sampler(std::uint64_t seed) : rng(seed) {}

  double scalar(double span) { return span * unit(rng); }
  DqVector dq(double span) { return {scalar(span), scalar(span)}; }
  double theta() { return angle(rng); }
};

}  // namespace

SuiteReport transforms(std::uint64_t seed, int samples) {
  Checker c("transforms");
  Sampler rnd(seed);

  const DqVector aligned = abc_to_dq({1.0, -0.5, -0.5}, Angle(0.0));
  c.check(close(aligned, DqVector{std::sqrt(1.5), 0.0}, 1.0), "cosine set at theta=0");

  for (int k = 0; k < samples; ++k) {
    const DqVector x = rnd.dq(3.0);
    const Angle th(rnd.theta());
    const double d1 = rnd.theta();
    const double d2 = rnd.theta();
    const double scale = x.norm();

    c.check(close(abc_to_dq(dq_to_abc(x, th), th), x, scale), describe("dq->abc->dq", k));
    c.check(close(rotate_frame(rotate_frame(x, d1), -d1), x, scale),
            describe("rotation inverse", k));
    c.check(close(rotate_frame(rotate_frame(x, d1), d2), rotate_frame(x, d1 + d2), scale),
            describe("rotation composition", k));
    c.check(std::fabs(rotate_frame(x, d1).norm() - scale) <= kTol * std::fmax(1.0, scale),
            describe("rotation preserves magnitude", k));
    // Moving the frame forward by delta rotates the vector back by delta.
    const ThreePhaseSample abc = dq_to_abc(x, th);
    c.check(close(abc_to_dq(abc, th + d1), rotate_frame(x, -d1), scale),
            describe("frame shift equals rotation", k));
  }
  return c.finish();
}

SuiteReport power_invariance(std::uint64_t seed, int samples) {
  Checker c("power-invariance");
  Sampler rnd(seed ^ 0x9e3779b97f4a7c15ULL);
  const double inv_sqrt3 = 1.0 / std::sqrt(3.0);

  for (int k = 0; k < samples; ++k) {
    const DqVector v = rnd.dq(2.0);
    const DqVector i = rnd.dq(2.0);
    const double delta = rnd.theta();
    const double scale = v.norm() * i.norm();

    const PowerPair s0 = instantaneous_power(v, i);
    const PowerPair s1 = instantaneous_power(rotate_frame(v, delta), rotate_frame(i, delta));
    c.check(close(s0.p, s1.p, scale) && close(s0.q, s1.q, scale),
            describe("rotation invariance", k));

    // Phase-domain reference, independent of the transform scaling.
    const Angle th(rnd.theta());
    const ThreePhaseSample va{rnd.scalar(1.5), rnd.scalar(1.5), 0.0};
    const ThreePhaseSample ia{rnd.scalar(1.5), rnd.scalar(1.5), 0.0};
    const ThreePhaseSample vb{va.a, va.b, -va.a - va.b};
    const ThreePhaseSample ib{ia.a, ia.b, -ia.a - ia.b};
    const double p_abc = vb.a * ib.a + vb.b * ib.b + vb.c * ib.c;
    // Sign follows q = v_d i_q - v_q i_d.
    const double q_abc =
        -inv_sqrt3 * ((vb.b - vb.c) * ib.a + (vb.c - vb.a) * ib.b + (vb.a - vb.b) * ib.c);
    const PowerPair sd = instantaneous_power(abc_to_dq(vb, th), abc_to_dq(ib, th));
    const double abc_scale = vb.max_abs() * ib.max_abs() * 3.0;
    c.check(close(sd.p, p_abc, abc_scale) && close(sd.q, q_abc, abc_scale),
            describe("dq power equals phase power", k));
  }
  return c.finish();
}

SuiteReport power_reference(std::uint64_t seed, int samples) {
  Checker c("power-reference");
  Sampler rnd(seed ^ 0x51ed270b27f5a3c1ULL);
  const double v_min = 0.05;
  for (int k = 0; k < samples; ++k) {
    DqVector v = rnd.dq(1.5);
    if (v.norm() <= v_min) {
      v = DqVector{v_min * 2.0, v.q};
    }
    const double p = rnd.scalar(1.5);
    const double q = rnd.scalar(1.5);
    const CurrentReference ref = current_references(v, p, q, v_min, 1e9);
    const PowerPair s = instantaneous_power(v, ref.i_ref);
    const double scale = std::hypot(p, q);
    c.check(!ref.voltage_floor && close(s.p, p, scale) && close(s.q, q, scale),
            describe("back-substitution", k));
  }
  return c.finish();
}

SuiteReport compensation_identity(std::uint64_t seed, int samples) {
  Checker c("compensation-identity");
  Sampler rnd(seed ^ 0x2545f4914f6cdd1dULL);
  const PerUnitBase base;
  const double ts = 5e-5;
  std::uniform_int_distribution<int> ticks(0, 1000);

  for (int k = 0; k < samples; ++k) {
    const double phase0 = rnd.theta();
    const double t = ts * ticks(rnd.rng) + 1.0;
    const double tau = ts * ticks(rnd.rng);
    const Angle delayed(phase0 + base.omega_nominal * (t - tau));
    const Angle truth(phase0 + base.omega_nominal * t);
    const Angle rebuilt = compensate_angle(delayed, tau, base);
    c.check(std::fabs(Angle::difference(rebuilt, truth)) < 1e-9,
            describe("compensated angle", k));
  }

  // Channel lag: an angle stream at nominal frequency arrives tau * omega_N behind.
  for (double tau : {0.0, 0.005, 0.01, 0.02, 0.03}) {
    DelayChannel ch(tau, ts);
    bool ok = true;
    for (int n = 0; n < 2000; ++n) {
      const double t = n * ts;
      ch.push({t, Angle(base.omega_nominal * t)});
      if (t < tau) {
        continue;
      }
      const TimestampedAngle seen = ch.pop(t);
      const Angle expected(base.omega_nominal * (t - tau));
      ok = ok && std::fabs(seen.stamp - (t - tau)) < 1e-12 &&
           std::fabs(Angle::difference(seen.angle, expected)) < 1e-9;
    }
    c.check(ok, "channel lag at tau=" + std::to_string(tau));
  }
  return c.finish();
}

SuiteReport pll_lock() {
  Checker c("pll-lock");
  const PerUnitBase base;
  const ControlParams control;
  // Clean 1 pu source with phase a = cos(omega t + phase).
  for (double initial_error : {1.0, -1.0}) {
    for (double grid_phase : {0.0, 1.0, 2.5, 4.0}) {
      PllState pll;
      pll.phase = Angle(grid_phase + initial_error);
      const int steps = static_cast<int>(std::lround(0.5 / control.t_sample));
      for (int n = 0; n < steps; ++n) {
        const double t = n * control.t_sample;
        const ThreePhaseSample v =
            dq_to_abc({kDqPerPeak, 0.0}, Angle(base.omega_nominal * t + grid_phase));
        pll = pll_update(pll, v, control, base);
      }
      const double t_end = steps * control.t_sample;
      const Angle truth(base.omega_nominal * t_end + grid_phase);
      const double err = std::fabs(Angle::difference(pll.phase, truth));
      char buf[96];
      std::snprintf(buf, sizeof buf, "error %.3g rad (start %+g, phase %g)", err,
                    initial_error, grid_phase);
      c.check(err < 0.01, buf);
    }
  }
  return c.finish();
}

std::vector<SuiteReport> run_all(std::uint64_t seed) {
  return {transforms(seed), power_invariance(seed), power_reference(seed),
          compensation_identity(seed), pll_lock()};
}

std::string format(const std::vector<SuiteReport>& reports) {
  std::ostringstream out;
  int failed_suites = 0;
  char buf[256];
  for (const SuiteReport& r : reports) {
    std::snprintf(buf, sizeof buf, "%-4s %-22s %5d passed %5d failed  %.3f s", r.ok() ? "PASS" : "FAIL",
                  r.name.c_str(), r.passed, r.failed, r.seconds);
    out << buf;
    if (!r.first_failure.empty()) {
      out << "  first failure: " << r.first_failure;
    }
    out << '\n';
    if (!r.ok()) {
      ++failed_suites;
    }
  }
  out << (failed_suites == 0 ? "all suites passed" : std::to_string(failed_suites) + " suite(s) failed")
      << '\n';
  return out.str();
}

}  // namespace weakgrid::validation
