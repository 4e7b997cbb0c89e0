#include "weakgrid/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "json.hpp"

namespace weakgrid::io {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

using Setter = std::function<void(const json&, const std::string&)>;

struct Field {
  const char* key;
  Setter set;
};

Setter number(double& dst) {
  return [&dst](const json& v, const std::string& path) {
    if (!v.is_number()) {
      throw ConfigError(path + ": expected a number");
    }
    dst = v.get<double>();
  };
}

Setter integer(int& dst) {
  return [&dst](const json& v, const std::string& path) {
    if (!v.is_number_integer()) {
      throw ConfigError(path + ": expected an integer");
    }
    dst = v.get<int>();
  };
}

Setter boolean(bool& dst) {
  return [&dst](const json& v, const std::string& path) {
    if (!v.is_boolean()) {
      throw ConfigError(path + ": expected true or false");
    }
    dst = v.get<bool>();
  };
}

Setter text(std::string& dst) {
  return [&dst](const json& v, const std::string& path) {
    if (!v.is_string()) {
      throw ConfigError(path + ": expected a string");
    }
    dst = v.get<std::string>();
  };
}

Setter sync_mode(SyncMode& dst) {
  return [&dst](const json& v, const std::string& path) {
    if (!v.is_string()) {
      throw ConfigError(path + ": expected \"pcc\" or \"sg\"");
    }
    try {
      dst = parse_sync_mode(v.get<std::string>());
    } catch (const std::invalid_argument&) {
      throw ConfigError(path + ": expected \"pcc\" or \"sg\", got \"" + v.get<std::string>() +
                        "\"");
    }
  };
}

void apply_fields(const json& obj, const std::string& section, const std::vector<Field>& fields) {
  if (!obj.is_object()) {
    throw ConfigError(section + ": expected an object");
  }
  for (const auto& [key, value] : obj.items()) {
    const std::string path = section + "." + key;
    bool known = false;
    for (const Field& f : fields) {
      if (key == f.key) {
        f.set(value, path);
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError("unknown key '" + path + "'");
    }
  }
}

void apply_document(const json& doc, Scenario& s) {
  double f_nominal = s.base.f_nominal;
  const std::vector<std::pair<std::string, std::vector<Field>>> sections = {
      {"base",
       {{"v_base_sg", number(s.base.v_base_sg)},
        {"v_base_vsc", number(s.base.v_base_vsc)},
        {"s_base", number(s.base.s_base)},
        {"f_nominal", number(f_nominal)}}},
      {"network",
       {{"x_filter_l", number(s.network.x_filter_l)},
        {"x_filter_c", number(s.network.x_filter_c)},
        {"x_transformer", number(s.network.x_transformer)},
        {"r_line", number(s.network.r_line)},
        {"x_line", number(s.network.x_line)},
        {"r_load", number(s.network.r_load)},
        {"r_fault", number(s.network.r_fault)},
        {"r_filter_parasitic", number(s.network.r_filter_parasitic)}}},
      {"control",
       {{"kp_pll", number(s.control.kp_pll)},
        {"ki_pll", number(s.control.ki_pll)},
        {"kp_current", number(s.control.kp_current)},
        {"ki_current", number(s.control.ki_current)},
        {"p_set", number(s.control.p_set)},
        {"q_set", number(s.control.q_set)},
        {"t_sample", number(s.control.t_sample)},
        {"u_max", number(s.control.u_max)},
        {"v_min", number(s.control.v_min)},
        {"i_max", number(s.control.i_max)},
        {"decoupling_reactance", number(s.control.decoupling_reactance)},
        {"voltage_filter_cutoff", number(s.control.voltage_filter_cutoff)}}},
      {"sync",
       {{"mode", sync_mode(s.sync_mode)},
        {"delay", number(s.delay)},
        {"compensate", boolean(s.compensation_enabled)},
        {"angle_offset", number(s.sync_angle_offset)},
        {"channel_decimation", integer(s.channel_decimation)}}},
      {"fault",
       {{"t_start", number(s.fault.t_start)},
        {"duration_cycles", number(s.fault.duration_cycles)},
        {"location", number(s.fault.location)}}},
      {"timing", {{"t_end", number(s.t_end)}, {"dt_plant", number(s.dt_plant)}}},
      {"criteria",
       {{"band", number(s.criteria.band)},
        {"ripple", number(s.criteria.ripple)},
        {"window", number(s.criteria.window)},
        {"min_post_fault", number(s.criteria.min_post_fault)},
        {"settle_band", number(s.criteria.settle_band)}}},
  };

  for (const auto& [key, value] : doc.items()) {
    if (key == "preset") {
      continue;
    }
    if (key == "label") {
      text(s.label)(value, key);
      continue;
    }
    bool known = false;
    for (const auto& [name, fields] : sections) {
      if (key == name) {
        apply_fields(value, name, fields);
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError("unknown key '" + key + "'");
    }
  }

  if (f_nominal != s.base.f_nominal) {
    const PerUnitBase fresh = PerUnitBase::from_frequency(f_nominal);
    s.base.f_nominal = fresh.f_nominal;
    s.base.omega_nominal = fresh.omega_nominal;
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::string optional_text(const std::optional<double>& v) {
  return v ? fmt(*v) + " s" : std::string("not-settled");
}

double parse_double(std::string_view cell, std::size_t line) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw IoError("line " + std::to_string(line) + ": bad number '" + std::string(cell) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

Scenario scenario_from_json(std::string_view text_in) {
  json doc;
  try {
    doc = json::parse(text_in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) {
    throw ConfigError("config root must be an object");
  }
  Scenario s = presets::case_a();
  if (doc.contains("preset")) {
    const json& p = doc["preset"];
    if (!p.is_string()) {
      throw ConfigError("preset: expected a string");
    }
    try {
      s = presets::by_name(p.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("preset: ") + e.what());
    }
  }
  apply_document(doc, s);
  validate(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot read config '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

std::string scenario_to_json(const Scenario& s) {
  ordered_json doc;
  doc["label"] = s.label;
  doc["base"] = {{"v_base_sg", s.base.v_base_sg},
                 {"v_base_vsc", s.base.v_base_vsc},
                 {"s_base", s.base.s_base},
                 {"f_nominal", s.base.f_nominal}};
  doc["network"] = {{"x_filter_l", s.network.x_filter_l},
                    {"x_filter_c", s.network.x_filter_c},
                    {"x_transformer", s.network.x_transformer},
                    {"r_line", s.network.r_line},
                    {"x_line", s.network.x_line},
                    {"r_load", s.network.r_load},
                    {"r_fault", s.network.r_fault},
                    {"r_filter_parasitic", s.network.r_filter_parasitic}};
  doc["control"] = {{"kp_pll", s.control.kp_pll},
                    {"ki_pll", s.control.ki_pll},
                    {"kp_current", s.control.kp_current},
                    {"ki_current", s.control.ki_current},
                    {"p_set", s.control.p_set},
                    {"q_set", s.control.q_set},
                    {"t_sample", s.control.t_sample},
                    {"u_max", s.control.u_max},
                    {"v_min", s.control.v_min},
                    {"i_max", s.control.i_max},
                    {"decoupling_reactance", s.control.decoupling_reactance},
                    {"voltage_filter_cutoff", s.control.voltage_filter_cutoff}};
  doc["sync"] = {{"mode", std::string(to_string(s.sync_mode))},
                 {"delay", s.delay},
                 {"compensate", s.compensation_enabled},
                 {"angle_offset", s.sync_angle_offset},
                 {"channel_decimation", s.channel_decimation}};
  doc["fault"] = {{"t_start", s.fault.t_start},
                  {"duration_cycles", s.fault.duration_cycles},
                  {"location", s.fault.location}};
  doc["timing"] = {{"t_end", s.t_end}, {"dt_plant", s.dt_plant}};
  doc["criteria"] = {{"band", s.criteria.band},
                     {"ripple", s.criteria.ripple},
                     {"window", s.criteria.window},
                     {"min_post_fault", s.criteria.min_post_fault},
                     {"settle_band", s.criteria.settle_band}};
  return doc.dump(2) + "\n";
}

void validate(const Scenario& s) {
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

void apply_overrides(Scenario& s, const Overrides& o) {
  if (o.sync) {
    s.sync_mode = *o.sync;
  }
  if (o.delay) {
    s.delay = *o.delay;
  }
  if (o.compensate) {
    s.compensation_enabled = *o.compensate;
  }
  if (o.fault_cycles) {
    s.fault.duration_cycles = *o.fault_cycles;
  }
  if (o.dt) {
    s.dt_plant = *o.dt;
  }
  validate(s);
}

std::string flags_to_string(std::uint8_t flags) {
  std::string out;
  auto add = [&out](const char* token) {
    if (!out.empty()) {
      out += ';';
    }
    out += token;
  };
  if ((flags & kFlagVoltageFloor) != 0U) {
    add("voltage-floor");
  }
  if ((flags & kFlagSaturated) != 0U) {
    add("saturated");
  }
  if ((flags & kFlagDiverged) != 0U) {
    add("diverged");
  }
  return out;
}

std::uint8_t flags_from_string(std::string_view text_in) {
  std::uint8_t flags = 0;
  if (text_in.empty()) {
    return flags;
  }
  for (std::string_view token : split(text_in, ';')) {
    if (token == "voltage-floor") {
      flags |= kFlagVoltageFloor;
    } else if (token == "saturated") {
      flags |= kFlagSaturated;
    } else if (token == "diverged") {
      flags |= kFlagDiverged;
    } else {
      throw IoError("unknown trace flag '" + std::string(token) + "'");
    }
  }
  return flags;
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << kTraceHeader << '\n';
  char buf[320];
  for (const TraceRow& r : trace) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,", r.t,
                  r.v_pcc_dq.d, r.v_pcc_dq.q, r.i_l_dq.d, r.i_l_dq.q, r.p, r.q,
                  r.pll_angle.value());
    out << buf << flags_to_string(r.flags) << '\n';
  }
}

Trace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw IoError("trace header mismatch");
  }
  Trace trace;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() != 9) {
      throw IoError("line " + std::to_string(line_no) + ": expected 9 columns, got " +
                    std::to_string(cells.size()));
    }
    TraceRow r;
    r.t = parse_double(cells[0], line_no);
    r.v_pcc_dq = {parse_double(cells[1], line_no), parse_double(cells[2], line_no)};
    r.i_l_dq = {parse_double(cells[3], line_no), parse_double(cells[4], line_no)};
    r.p = parse_double(cells[5], line_no);
    r.q = parse_double(cells[6], line_no);
    r.pll_angle = Angle(parse_double(cells[7], line_no));
    r.flags = flags_from_string(cells[8]);
    if (!trace.empty() && !(r.t > trace.back().t)) {
      throw IoError("line " + std::to_string(line_no) + ": t not increasing");
    }
    trace.push_back(r);
  }
  return trace;
}

void write_trace_file(const std::filesystem::path& path, const Trace& trace) {
  std::ostringstream buf;
  write_trace_csv(buf, trace);
  write_text_file(path, buf.str());
}

Trace read_trace_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot read trace '" + path.string() + "'");
  }
  return read_trace_csv(in);
}

std::string metrics_to_text(const Metrics& m, const Scenario& s) {
  std::ostringstream out;
  out << "scenario        " << s.label << '\n'
      << "sync            " << to_string(s.sync_mode) << '\n'
      << "delay           " << fmt(s.delay) << " s" << (s.compensation_enabled ? " (compensated)" : "")
      << '\n'
      << "classification  " << to_string(m.stable) << '\n'
      << "scr             " << fmt(m.scr) << '\n'
      << "prefault p/q/v  " << fmt(m.prefault_p) << " / " << fmt(m.prefault_q) << " / "
      << fmt(m.prefault_v) << '\n'
      << "steady p/q      " << fmt(m.steady_p) << " / " << fmt(m.steady_q) << '\n'
      << "settle p        " << optional_text(m.settle_time_p) << '\n'
      << "settle q        " << optional_text(m.settle_time_q) << '\n'
      << "settle v        " << optional_text(m.settle_time_v) << '\n'
      << "overshoot p     " << fmt(m.overshoot_p) << '\n'
      << "floor ticks     " << m.voltage_floor_ticks << '\n';
  if (!m.operating_point_found) {
    out << "note            no steady operating point; started from no-load\n";
  }
  return out.str();
}

namespace {

ordered_json metrics_object(const Metrics& m) {
  ordered_json j;
  j["classification"] = std::string(to_string(m.stable));
  j["settle_time_p"] = optional_number(m.settle_time_p);
  j["settle_time_q"] = optional_number(m.settle_time_q);
  j["settle_time_v"] = optional_number(m.settle_time_v);
  j["overshoot_p"] = m.overshoot_p;
  j["scr"] = m.scr;
  j["steady_p"] = m.steady_p;
  j["steady_q"] = m.steady_q;
  j["prefault_p"] = m.prefault_p;
  j["prefault_q"] = m.prefault_q;
  j["prefault_v"] = m.prefault_v;
  j["voltage_floor_ticks"] = m.voltage_floor_ticks;
  j["operating_point_found"] = m.operating_point_found;
  return j;
}

}  // namespace

std::string metrics_to_json(const Metrics& m, const Scenario& s) {
  ordered_json j;
  j["scenario"] = s.label;
  j["sync"] = std::string(to_string(s.sync_mode));
  j["delay"] = s.delay;
  j["compensate"] = s.compensation_enabled;
  j["metrics"] = metrics_object(m);
  return j.dump(2) + "\n";
}

std::string compare_report_text(const Scenario& s, const Metrics& pcc, const Metrics& sg) {
  std::ostringstream out;
  char buf[160];
  out << "scenario " << s.label << "  x_line " << fmt(s.network.x_line) << "  scr "
      << fmt(pcc.scr) << "\n\n";
  std::snprintf(buf, sizeof buf, "%-16s %-22s %-22s\n", "", "pcc", "sg");
  out << buf;
  auto row = [&](const char* name, const std::string& a, const std::string& b) {
    std::snprintf(buf, sizeof buf, "%-16s %-22s %-22s\n", name, a.c_str(), b.c_str());
    out << buf;
  };
  row("classification", std::string(to_string(pcc.stable)), std::string(to_string(sg.stable)));
  row("settle p", optional_text(pcc.settle_time_p), optional_text(sg.settle_time_p));
  row("settle q", optional_text(pcc.settle_time_q), optional_text(sg.settle_time_q));
  row("settle v", optional_text(pcc.settle_time_v), optional_text(sg.settle_time_v));
  row("overshoot p", fmt(pcc.overshoot_p), fmt(sg.overshoot_p));
  row("steady p", fmt(pcc.steady_p), fmt(sg.steady_p));
  row("steady q", fmt(pcc.steady_q), fmt(sg.steady_q));
  return out.str();
}

std::string compare_report_json(const Scenario& s, const Metrics& pcc, const Metrics& sg) {
  ordered_json j;
  j["scenario"] = s.label;
  j["x_line"] = s.network.x_line;
  j["r_line"] = s.network.r_line;
  j["pcc"] = metrics_object(pcc);
  j["sg"] = metrics_object(sg);
  return j.dump(2) + "\n";
}

void write_sweep_csv(std::ostream& out, const SweepResult& r) {
  out << "x_line,r_line,mode,classification\n";
  for (const SweepRow& row : r.rows) {
    out << fmt(row.x_line) << ',' << fmt(row.r_line) << ',' << to_string(row.mode) << ','
        << to_string(row.stability) << '\n';
  }
}

std::string sweep_summary_json(const SweepResult& r) {
  ordered_json j;
  j["crossover"] = optional_number(r.crossover);
  j["dominance_violated"] = r.dominance_violated;
  j["points"] = r.rows.size() / 2;
  return j.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) {
      throw IoError("cannot create '" + path.parent_path().string() + "': " + ec.message());
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write '" + path.string() + "'");
  }
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) {
    throw IoError("write failed for '" + path.string() + "'");
  }
}

}  // namespace weakgrid::io
