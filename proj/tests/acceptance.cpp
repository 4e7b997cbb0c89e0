// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "weakgrid/io.hpp"
#include "weakgrid/scenario.hpp"
#include "weakgrid/validation.hpp"

using namespace weakgrid;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string opt(const std::optional<double>& v) {
  return v ? fmt("%.4f", *v) : std::string("n/a");
}

Outcome from_suite(const validation::SuiteReport& r, double budget_s) {
  Outcome o;
  o.pass = r.ok() && r.seconds < budget_s;
  o.detail = std::to_string(r.passed) + " checks, " + std::to_string(r.failed) + " failed, " +
             fmt("%.3f s", r.seconds);
  if (!r.first_failure.empty()) {
    o.detail += "; first failure: " + r.first_failure;
  }
  return o;
}

struct Diff {
  double angle = 0.0;
  double channels = 0.0;
};

Diff trace_diff(const Trace& a, const Trace& b) {
  Diff d;
  if (a.size() != b.size()) {
    d.angle = d.channels = INFINITY;
    return d;
  }
  for (std::size_t k = 0; k < a.size(); ++k) {
    d.angle = std::fmax(d.angle, std::fabs(Angle::difference(a[k].pll_angle, b[k].pll_angle)));
    for (double x : {a[k].v_pcc_dq.d - b[k].v_pcc_dq.d, a[k].v_pcc_dq.q - b[k].v_pcc_dq.q,
                     a[k].i_l_dq.d - b[k].i_l_dq.d, a[k].i_l_dq.q - b[k].i_l_dq.q,
                     a[k].p - b[k].p, a[k].q - b[k].q}) {
      d.channels = std::fmax(d.channels, std::fabs(x));
    }
  }
  return d;
}

// Settling of the slowest of p and q.
std::optional<double> settle_pq(const Metrics& m) {
  if (!m.settle_time_p || !m.settle_time_q) {
    return std::nullopt;
  }
  return std::fmax(*m.settle_time_p, *m.settle_time_q);
}

Outcome criterion_delay_compensation() {
  Scenario ref = presets::case_b();
  ref.label = "case_b";
  const Scenario comp = presets::case_c();
  const RunResult a = run(ref);
  const RunResult b = run(comp);
  const Diff d = trace_diff(a.trace, b.trace);
  Outcome o;
  o.pass = d.angle <= 1e-9 && d.channels <= 1e-6 && b.metrics.stable == Stability::Stable;
  o.detail = "max angle diff " + fmt("%.3g rad", d.angle) + ", max channel diff " +
             fmt("%.3g pu", d.channels) + ", delayed run " +
             std::string(to_string(b.metrics.stable));
  return o;
}

Outcome criterion_case_a() {
  Scenario pcc = presets::case_a();
  pcc.sync_mode = SyncMode::PccSync;
  const Scenario sg = presets::case_a();
  const RunResult rp = run(pcc);
  const RunResult rs = run(sg);

  bool ok = true;
  for (const Metrics* m : {&rp.metrics, &rs.metrics}) {
    ok = ok && std::fabs(m->prefault_p - 1.0) <= 0.01 && std::fabs(m->prefault_q + 0.2) <= 0.002;
    ok = ok && m->stable == Stability::Stable;
    ok = ok && m->settle_time_p && *m->settle_time_p <= 0.5;
    ok = ok && m->settle_time_q && *m->settle_time_q <= 0.5;
  }
  const auto tp = settle_pq(rp.metrics);
  const auto ts = settle_pq(rs.metrics);
  ok = ok && tp && ts && *ts <= *tp;

  Outcome o;
  o.pass = ok;
  o.detail = "prefault p/q pcc " + fmt("%.5f", rp.metrics.prefault_p) + "/" +
             fmt("%.5f", rp.metrics.prefault_q) + " sg " + fmt("%.5f", rs.metrics.prefault_p) +
             "/" + fmt("%.5f", rs.metrics.prefault_q) + "; settle p,q pcc " +
             opt(rp.metrics.settle_time_p) + "," + opt(rp.metrics.settle_time_q) + " sg " +
             opt(rs.metrics.settle_time_p) + "," + opt(rs.metrics.settle_time_q) +
             " s; slowest sg " + opt(ts) + " <= pcc " + opt(tp);
  return o;
}

Outcome criterion_case_b() {
  Scenario pcc = presets::case_b();
  pcc.sync_mode = SyncMode::PccSync;
  const Scenario sg = presets::case_b();
  const Stability sp = run(pcc).metrics.stable;
  const Stability ss = run(sg).metrics.stable;
  std::string detail = "exact point: pcc " + std::string(to_string(sp)) + ", sg " +
                       std::string(to_string(ss));
  if (ss == Stability::Stable && sp != Stability::Stable) {
    return {true, detail};
  }

  // Substitute property: sweep with a pinned crossover.
  const fs::path baseline = fs::path(WEAKGRID_SOURCE_DIR) / "tests" / "baseline" / "crossover.json";
  std::ifstream in(baseline);
  if (!in) {
    return {false, detail + "; baseline file missing"};
  }
  const nlohmann::json b = nlohmann::json::parse(in);
  const double x_min = b.at("x_min").get<double>();
  const double x_max = b.at("x_max").get<double>();
  const int steps = b.at("steps").get<int>();
  const auto t0 = std::chrono::steady_clock::now();
  const SweepResult r = impedance_sweep(presets::case_b(), linspace(x_min, x_max, steps));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  detail += "; sweep [" + fmt("%g", x_min) + ", " + fmt("%g", x_max) + "] x " +
            std::to_string(steps) + ": crossover " + opt(r.crossover) + ", pinned " +
            fmt("%.4f", b.at("crossover").get<double>()) +
            (r.dominance_violated ? ", REVERSE POINT FOUND" : ", no reverse point") +
            fmt(", %.1f s", secs);
  const bool ok = x_min <= 0.13 && x_max >= 1.0 && steps >= 9 && r.crossover &&
                  std::fabs(*r.crossover - b.at("crossover").get<double>()) < 1e-9 &&
                  !r.dominance_violated && secs < 600.0;
  return {ok, detail};
}

Outcome criterion_determinism() {
  const fs::path dir = fs::temp_directory_path() / "weakgrid_acceptance";
  fs::create_directories(dir);
  bool ok = true;
  std::string detail;
  for (const std::string& name : presets::names()) {
    const Scenario s = presets::by_name(name);
    io::write_trace_file(dir / (name + "_1.csv"), run(s).trace);
    io::write_trace_file(dir / (name + "_2.csv"), run(s).trace);
    auto slurp = [](const fs::path& p) {
      std::ifstream f(p, std::ios::binary);
      std::ostringstream ss;
      ss << f.rdbuf();
      return ss.str();
    };
    const std::string a = slurp(dir / (name + "_1.csv"));
    const bool same = !a.empty() && a == slurp(dir / (name + "_2.csv"));
    ok = ok && same;
    detail += name + (same ? " identical " : " DIFFERENT ") + "(" + std::to_string(a.size()) +
              " bytes); ";
  }
  fs::remove_all(dir);
  return {ok, detail};
}

Outcome criterion_convergence() {
  bool ok = true;
  std::string detail;
  for (SyncMode mode : {SyncMode::StrongGridSync, SyncMode::PccSync}) {
    Scenario s = presets::case_a();
    s.sync_mode = mode;
    const RunResult coarse = run(s);
    s.dt_plant *= 0.5;
    const RunResult fine = run(s);
    const Diff d = trace_diff(coarse.trace, fine.trace);
    ok = ok && d.channels < 1e-6 && d.angle < 1e-6;
    detail += std::string(to_string(mode)) + ": channels " + fmt("%.3g", d.channels) +
              " angle " + fmt("%.3g", d.angle) + "; ";
  }
  return {ok, detail + fmt("dt %g vs half", presets::case_a().dt_plant)};
}

Outcome criterion_scr() {
  const double a = compute_scr(presets::case_a().network);
  const double b = compute_scr(presets::case_b().network);
  return {b < a, "case_b " + fmt("%.4f", b) + " < case_a " + fmt("%.4f", a)};
}

}  // namespace

int main() {
  const std::uint64_t seed = 20240601;
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria = {
      {1, "power invariance", [&] { return from_suite(validation::power_invariance(seed, 1000), 1.0); }},
      {2, "transform round trips", [&] { return from_suite(validation::transforms(seed, 1000), 1.0); }},
      {3, "power reference back-substitution",
       [&] { return from_suite(validation::power_reference(seed, 1000), 1.0); }},
      {4, "delay compensation exactness", criterion_delay_compensation},
      {5, "stiff network reproduction", criterion_case_a},
      {6, "weak network reproduction", criterion_case_b},
      {7, "PLL lock", [] { return from_suite(validation::pll_lock(), 10.0); }},
      {8, "determinism", criterion_determinism},
      {9, "step-size convergence", criterion_convergence},
      {10, "SCR ordering", criterion_scr},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %2d %-34s %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) {
      ++failures;
    }
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
