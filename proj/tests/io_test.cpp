#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "weakgrid/io.hpp"

using namespace weakgrid;
using doctest::Approx;

namespace {

Trace sample_trace() {
  Trace tr;
  for (int k = 0; k < 50; ++k) {
    TraceRow r;
    r.t = k * 5e-5;
    r.v_pcc_dq = {1.2567893977123 + 1e-3 * k, -3.1e-7 * k};
    r.i_l_dq = {0.7956782590811, -0.1591356518163};
    r.p = 1.0 + 1e-9 * k;
    r.q = -0.2;
    r.pll_angle = Angle(0.1153063066 + 0.0157 * k);
    r.flags = static_cast<std::uint8_t>(k % 8);
    tr.push_back(r);
  }
  return tr;
}

bool close12(double a, double b) { return std::fabs(a - b) <= 1e-11 * std::fmax(1.0, std::fabs(a)); }

void check_same_scenario(const Scenario& a, const Scenario& b) {
  CHECK(a.label == b.label);
  CHECK(a.base.f_nominal == b.base.f_nominal);
  CHECK(a.base.omega_nominal == b.base.omega_nominal);
  CHECK(a.base.s_base == b.base.s_base);
  CHECK(a.base.v_base_sg == b.base.v_base_sg);
  CHECK(a.base.v_base_vsc == b.base.v_base_vsc);
  CHECK(a.network.x_filter_l == b.network.x_filter_l);
  CHECK(a.network.x_filter_c == b.network.x_filter_c);
  CHECK(a.network.x_transformer == b.network.x_transformer);
  CHECK(a.network.r_line == b.network.r_line);
  CHECK(a.network.x_line == b.network.x_line);
  CHECK(a.network.r_load == b.network.r_load);
  CHECK(a.network.r_fault == b.network.r_fault);
  CHECK(a.network.r_filter_parasitic == b.network.r_filter_parasitic);
  CHECK(a.control.kp_pll == b.control.kp_pll);
  CHECK(a.control.ki_pll == b.control.ki_pll);
  CHECK(a.control.kp_current == b.control.kp_current);
  CHECK(a.control.ki_current == b.control.ki_current);
  CHECK(a.control.p_set == b.control.p_set);
  CHECK(a.control.q_set == b.control.q_set);
  CHECK(a.control.t_sample == b.control.t_sample);
  CHECK(a.control.u_max == b.control.u_max);
  CHECK(a.control.v_min == b.control.v_min);
  CHECK(a.control.i_max == b.control.i_max);
  CHECK(a.control.decoupling_reactance == b.control.decoupling_reactance);
  CHECK(a.control.voltage_filter_cutoff == b.control.voltage_filter_cutoff);
  CHECK(a.sync_mode == b.sync_mode);
  CHECK(a.delay == b.delay);
  CHECK(a.compensation_enabled == b.compensation_enabled);
  CHECK(a.sync_angle_offset == b.sync_angle_offset);
  CHECK(a.channel_decimation == b.channel_decimation);
  CHECK(a.fault.t_start == b.fault.t_start);
  CHECK(a.fault.duration_cycles == b.fault.duration_cycles);
  CHECK(a.fault.location == b.fault.location);
  CHECK(a.t_end == b.t_end);
  CHECK(a.dt_plant == b.dt_plant);
  CHECK(a.criteria.band == b.criteria.band);
  CHECK(a.criteria.ripple == b.criteria.ripple);
  CHECK(a.criteria.window == b.criteria.window);
  CHECK(a.criteria.min_post_fault == b.criteria.min_post_fault);
  CHECK(a.criteria.settle_band == b.criteria.settle_band);
}

std::string error_of(std::string_view doc) {
  try {
    io::scenario_from_json(doc);
  } catch (const io::ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("trace CSV round trip") {
  const Trace tr = sample_trace();
  std::stringstream buf;
  io::write_trace_csv(buf, tr);
  std::string header;
  std::getline(buf, header);
  CHECK(header == io::kTraceHeader);
  buf.seekg(0);
  const Trace back = io::read_trace_csv(buf);
  REQUIRE(back.size() == tr.size());
  for (std::size_t k = 0; k < tr.size(); ++k) {
    CHECK(close12(back[k].t, tr[k].t));
    CHECK(close12(back[k].v_pcc_dq.d, tr[k].v_pcc_dq.d));
    CHECK(close12(back[k].v_pcc_dq.q, tr[k].v_pcc_dq.q));
    CHECK(close12(back[k].i_l_dq.d, tr[k].i_l_dq.d));
    CHECK(close12(back[k].i_l_dq.q, tr[k].i_l_dq.q));
    CHECK(close12(back[k].p, tr[k].p));
    CHECK(close12(back[k].q, tr[k].q));
    CHECK(std::fabs(Angle::difference(back[k].pll_angle, tr[k].pll_angle)) < 1e-10);
    CHECK(back[k].flags == tr[k].flags);
  }
}

TEST_CASE("trace CSV rejects malformed input") {
  std::istringstream bad_header("t,p\n0,1\n");
  CHECK_THROWS_AS(io::read_trace_csv(bad_header), io::IoError);
  std::istringstream short_row(std::string(io::kTraceHeader) + "\n0,1,2\n");
  CHECK_THROWS_AS(io::read_trace_csv(short_row), io::IoError);
  std::istringstream not_number(std::string(io::kTraceHeader) + "\n0,x,0,0,0,0,0,0,\n");
  CHECK_THROWS_AS(io::read_trace_csv(not_number), io::IoError);
  std::istringstream backwards(std::string(io::kTraceHeader) +
                               "\n1,0,0,0,0,0,0,0,\n0.5,0,0,0,0,0,0,0,\n");
  CHECK_THROWS_AS(io::read_trace_csv(backwards), io::IoError);
  std::istringstream bad_flag(std::string(io::kTraceHeader) + "\n0,0,0,0,0,0,0,0,boom\n");
  CHECK_THROWS_AS(io::read_trace_csv(bad_flag), io::IoError);
}

TEST_CASE("flag tokens") {
  CHECK(io::flags_to_string(0) == "");
  CHECK(io::flags_to_string(kFlagVoltageFloor | kFlagDiverged) == "voltage-floor;diverged");
  CHECK(io::flags_from_string("saturated") == kFlagSaturated);
  CHECK(io::flags_from_string("voltage-floor;saturated;diverged") == 7);
}

TEST_CASE("config documents select presets and override single fields") {
  const Scenario b = io::scenario_from_json(R"({"preset": "case_b"})");
  check_same_scenario(b, presets::case_b());

  const Scenario s = io::scenario_from_json(
      R"({"preset": "case_a", "sync": {"mode": "pcc"}, "network": {"x_line": 0.2}})");
  CHECK(s.sync_mode == SyncMode::PccSync);
  CHECK(s.network.x_line == 0.2);
  CHECK(s.network.r_line == 0.01298);

  const Scenario f = io::scenario_from_json(R"({"base": {"f_nominal": 60}})");
  CHECK(f.base.omega_nominal == Approx(kTwoPi * 60.0));
}

TEST_CASE("config rejection names the offending key") {
  CHECK(error_of(R"({"network": {"x_lin": 0.2}})").find("network.x_lin") != std::string::npos);
  CHECK(error_of(R"({"netwrk": {}})").find("netwrk") != std::string::npos);
  CHECK(error_of(R"({"network": {"x_line": "big"}})").find("network.x_line") !=
        std::string::npos);
  CHECK(error_of(R"({"network": {"x_line": -0.2}})").find("x_line") != std::string::npos);
  CHECK(error_of(R"({"sync": {"mode": "grid"}})").find("sync.mode") != std::string::npos);
  CHECK(error_of(R"({"sync": {"compensate": 1}})").find("sync.compensate") != std::string::npos);
  CHECK(error_of(R"({"preset": "case_q"})").find("case_q") != std::string::npos);
  CHECK(error_of("{\"network\": ") .find("malformed") != std::string::npos);
  CHECK(error_of("[1, 2]").find("object") != std::string::npos);
  CHECK(error_of(R"({"timing": {"dt_plant": 3e-6}})").find("dt_plant") != std::string::npos);
}

TEST_CASE("scenario JSON round trip") {
  for (const std::string& name : presets::names()) {
    const Scenario s = presets::by_name(name);
    check_same_scenario(io::scenario_from_json(io::scenario_to_json(s)), s);
  }
}

TEST_CASE("shipped preset files equal the built-in presets") {
  const std::filesystem::path dir = std::filesystem::path(WEAKGRID_SOURCE_DIR) / "presets";
  for (const std::string& name : presets::names()) {
    const Scenario s = io::load_scenario(dir / (name + ".json"));
    check_same_scenario(s, presets::by_name(name));
  }
  CHECK_THROWS_AS(io::load_scenario(dir / "missing.json"), io::IoError);
}

TEST_CASE("overrides are applied and validated") {
  Scenario s = presets::case_b();
  io::Overrides o;
  o.sync = SyncMode::StrongGridSync;
  o.delay = 0.01;
  o.compensate = true;
  o.fault_cycles = 5.0;
  o.dt = 5e-7;
  io::apply_overrides(s, o);
  CHECK(s.delay == 0.01);
  CHECK(s.compensation_enabled);
  CHECK(s.fault.duration_cycles == 5.0);
  CHECK(s.dt_plant == 5e-7);

  Scenario p = presets::case_a();
  io::Overrides bad;
  bad.sync = SyncMode::PccSync;
  bad.delay = 0.01;
  CHECK_THROWS_AS(io::apply_overrides(p, bad), io::ConfigError);
}

TEST_CASE("metrics reports") {
  Metrics m;
  m.settle_time_p = 0.12;
  m.stable = Stability::UnstableOscillatory;
  const Scenario s = presets::case_a();
  const std::string json = io::metrics_to_json(m, s);
  CHECK(json.find("\"settle_time_q\": null") != std::string::npos);
  CHECK(json.find("unstable-oscillatory") != std::string::npos);
  const std::string text = io::metrics_to_text(m, s);
  CHECK(text.find("not-settled") != std::string::npos);
  const std::string cmp = io::compare_report_text(s, m, Metrics{});
  CHECK(cmp.find("pcc") != std::string::npos);
  CHECK(cmp.find("sg") != std::string::npos);
}

TEST_CASE("sweep table") {
  SweepResult r;
  r.rows = {{0.2, 0.02, SyncMode::PccSync, Stability::Stable},
            {0.2, 0.02, SyncMode::StrongGridSync, Stability::Stable}};
  std::ostringstream out;
  io::write_sweep_csv(out, r);
  CHECK(out.str() == "x_line,r_line,mode,classification\n0.2,0.02,pcc,stable\n0.2,0.02,sg,stable\n");
  CHECK(io::sweep_summary_json(r).find("\"crossover\": null") != std::string::npos);
}

TEST_CASE("file writes create directories and report failures") {
  const auto dir = std::filesystem::temp_directory_path() / "weakgrid_io_test" / "nested";
  std::filesystem::remove_all(dir.parent_path());
  io::write_trace_file(dir / "t.csv", sample_trace());
  CHECK(io::read_trace_file(dir / "t.csv").size() == 50);
  CHECK_THROWS_AS(io::write_text_file("/proc/definitely/not/here.txt", "x"), io::IoError);
  std::filesystem::remove_all(dir.parent_path());
}
