#include "ringsim/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"

#include "ringsim/errors.hpp"
#include "ringsim/fleet.hpp"

namespace ringsim {

namespace {

using nlohmann::json;

std::string num6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", x);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, const char* what) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw InputError(std::string("could not parse number in column ") + what);
  return v;
}

// Centered moving average, window shrinks one-sidedly at the edges.
std::vector<double> moving_average(const std::vector<double>& x, int window) {
  if (window <= 1 || x.size() < 2) return x;
  const int h = window / 2;
  const int m = static_cast<int>(x.size());
  std::vector<double> out(x.size());
  for (int k = 0; k < m; ++k) {
    const int lo = std::max(0, k - h);
    const int hi = std::min(m - 1, k + h);
    double sum = 0.0;
    for (int j = lo; j <= hi; ++j) sum += x[j];
    out[k] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

std::vector<double> central_difference(const std::vector<double>& x, double dt) {
  const std::size_t m = x.size();
  std::vector<double> out(m, 0.0);
  if (m < 2) return out;
  out[0] = (x[1] - x[0]) / dt;
  out[m - 1] = (x[m - 1] - x[m - 2]) / dt;
  for (std::size_t k = 1; k + 1 < m; ++k) out[k] = (x[k + 1] - x[k - 1]) / (2.0 * dt);
  return out;
}

std::vector<double> smoothed_derivative(const std::vector<double>& x, double dt, double window_s) {
  int window = static_cast<int>(std::lround(window_s / dt));
  if (window % 2 == 0) ++window;
  return moving_average(central_difference(x, dt), window);
}

}  // namespace

void export_csv(const TrajectoryDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "time,vehicle_id,position_m,velocity_mps,accel_mps2,fuel_lps,v_cmd_mps\n";

  // Vehicles ordered by id within each tick.
  std::vector<std::size_t> order(data.vehicles.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return data.vehicles[a].id < data.vehicles[b].id; });

  const std::size_t m = data.sample_count();
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i : order) {
      const auto& veh = data.vehicles[i];
      out << num6(data.time_at(j)) << ',' << veh.id << ',' << num6(veh.position[j]) << ','
          << num6(veh.velocity[j]) << ',' << num6(veh.acceleration[j]) << ','
          << num6(veh.fuel_rate[j]) << ',';
      if (static_cast<int>(i) == data.av_index && j < data.av_command.size() &&
          !std::isnan(data.av_command[j])) {
        out << num6(data.av_command[j]);
      }
      out << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

TrajectoryDataset import_displacement(const std::filesystem::path& path,
                                      const ImportOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw InputError("empty file: " + path.string());
  const auto header = split_csv_line(line);
  std::map<std::string, int> col;
  for (std::size_t k = 0; k < header.size(); ++k) col[header[k]] = static_cast<int>(k);

  const auto find = [&](const std::string& name) -> int {
    auto it = col.find(name);
    return it == col.end() ? -1 : it->second;
  };
  const int c_time = find(options.time_column);
  const int c_id = find(options.vehicle_column);
  const int c_pos = find(options.position_column);
  if (c_time < 0 || c_id < 0 || c_pos < 0) {
    throw InputError("missing required columns (" + options.time_column + ", " +
                     options.vehicle_column + ", " + options.position_column + ")");
  }
  const int c_vel = find(options.velocity_column);
  const int c_acc = find(options.accel_column);
  const int c_fuel = find(options.fuel_column);
  const int c_cmd = find(options.command_column);

  struct Raw {
    std::vector<double> t, pos, vel, acc, fuel, cmd;
  };
  std::map<int, Raw> by_id;  // vehicle_id -> series, ordered by id
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    const auto field = [&](int c) -> std::string {
      return (c >= 0 && c < static_cast<int>(f.size())) ? f[c] : std::string();
    };
    const double id_value = parse_double(field(c_id), "vehicle_id");
    const double t_value = parse_double(field(c_time), "time");
    const double pos_value = parse_double(field(c_pos), "position");
    if (std::isnan(id_value) || std::isnan(t_value) || std::isnan(pos_value)) {
      throw InputError("row with empty time/vehicle/position field");
    }
    const int id = static_cast<int>(id_value);
    Raw& r = by_id[id];
    r.t.push_back(t_value);
    r.pos.push_back(pos_value);
    if (c_vel >= 0) r.vel.push_back(parse_double(field(c_vel), "velocity"));
    if (c_acc >= 0) r.acc.push_back(parse_double(field(c_acc), "acceleration"));
    if (c_fuel >= 0) r.fuel.push_back(parse_double(field(c_fuel), "fuel"));
    if (c_cmd >= 0) r.cmd.push_back(parse_double(field(c_cmd), "v_cmd"));
  }
  if (by_id.empty()) throw InputError("no data rows: " + path.string());

  // Establish dt from the first vehicle, verify uniformity everywhere.
  const Raw& first = by_id.begin()->second;
  if (first.t.size() < 2) throw InputError("need at least two samples per vehicle");
  double dt = options.expected_dt > 0.0 ? options.expected_dt : first.t[1] - first.t[0];
  if (!(dt > 0.0)) throw InputError("non-increasing time column");
  const std::size_t m = first.t.size();

  TrajectoryDataset data;
  data.dt = dt;
  for (auto& [id, raw] : by_id) {
    if (raw.t.size() != m) throw InputError("vehicles have unequal sample counts");
    if (std::abs(raw.t.front() - first.t.front()) > options.jitter_tolerance * dt) {
      throw InputError("vehicles are not sampled on a common time base");
    }
    for (std::size_t k = 1; k < raw.t.size(); ++k) {
      const double step = raw.t[k] - raw.t[k - 1];
      if (std::abs(step - dt) > options.jitter_tolerance * dt) {
        throw InputError("non-uniform sampling beyond tolerance at t=" + std::to_string(raw.t[k]));
      }
    }
    VehicleSeries veh;
    veh.id = id;
    veh.position = raw.pos;
    veh.velocity = raw.vel.empty() ? smoothed_derivative(raw.pos, dt, options.smoothing_window)
                                   : raw.vel;
    veh.acceleration = raw.acc.empty()
                           ? smoothed_derivative(veh.velocity, dt, options.smoothing_window)
                           : raw.acc;
    veh.fuel_rate = raw.fuel.empty() ? std::vector<double>(m, 0.0) : raw.fuel;
    if (!raw.cmd.empty()) {
      bool any = false;
      for (double c : raw.cmd) any = any || !std::isnan(c);
      if (any) {
        data.av_command = raw.cmd;
        data.av_index = static_cast<int>(data.vehicles.size());
      }
    }
    data.vehicles.push_back(std::move(veh));
  }
  if (data.av_command.empty()) {
    data.av_command.assign(m, std::numeric_limits<double>::quiet_NaN());
    data.av_index = -1;
  }
  return data;
}

void write_report_csv(const MetricsReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "interval,t_start,t_end,v_mean,v_std,fuel_l_per_100km,braking_events_per_veh_km,"
         "throughput_veh_hr\n";
  for (const auto& row : report.rows) {
    out << row.interval.label << ',' << num6(row.interval.t_start) << ','
        << num6(row.interval.t_end) << ',' << num6(row.velocity_mean) << ','
        << num6(row.velocity_std) << ',' << num6(row.fuel_per_100km) << ','
        << num6(row.braking_rate) << ',' << num6(row.throughput) << '\n';
  }
  if (const auto cmp = ws_ca_comparison(report)) {
    out << "pct_change_ws_to_ca," << num6(0.0) << ',' << num6(0.0) << ','
        << num6(cmp->velocity_mean_pct) << ',' << num6(cmp->velocity_std_pct) << ','
        << num6(cmp->fuel_pct) << ',' << num6(cmp->braking_pct) << ','
        << num6(cmp->throughput_pct) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::string render_report_text(const MetricsReport& report) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-16s %10s %10s %12s %14s %12s\n", "Interval", "Time (s)",
                "V std", "Fuel l/100km", "Braking /v/km", "Thru veh/hr");
  out << buf;
  for (const auto& row : report.rows) {
    std::snprintf(buf, sizeof(buf), "%-16s %10.1f %10.2f %12.1f %14.2f %12.0f\n",
                  row.interval.label.c_str(), row.interval.t_start, row.velocity_std,
                  row.fuel_per_100km, row.braking_rate, row.throughput);
    out << buf;
  }
  if (const auto cmp = ws_ca_comparison(report)) {
    std::snprintf(buf, sizeof(buf), "%-16s %10s %+9.1f%% %+11.1f%% %+13.1f%% %+11.1f%%\n",
                  "WS -> CA", "", cmp->velocity_std_pct, cmp->fuel_pct, cmp->braking_pct,
                  cmp->throughput_pct);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), "braking threshold tau = %.3f m/s^2", report.deceleration_tau);
  out << buf;
  if (report.wave_onset) {
    std::snprintf(buf, sizeof(buf), ", wave onset = %.2f s", *report.wave_onset);
    out << buf;
  }
  out << '\n';
  return out.str();
}

void write_intervals_csv(const std::vector<Interval>& intervals,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "label,t_start,t_end,controlled\n";
  for (const auto& iv : intervals) {
    out << iv.label << ',' << num6(iv.t_start) << ',' << num6(iv.t_end) << ','
        << (iv.controlled ? 1 : 0) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<Interval> read_intervals_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty intervals file");
  std::vector<Interval> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() < 3) throw InputError("intervals file needs label,t_start,t_end");
    Interval iv;
    iv.label = f[0];
    iv.t_start = parse_double(f[1], "t_start");
    iv.t_end = parse_double(f[2], "t_end");
    iv.controlled = f.size() > 3 && !f[3].empty() && f[3] != "0";
    if (!(iv.t_start < iv.t_end)) throw InputError("interval must satisfy t_start < t_end");
    out.push_back(iv);
  }
  return out;
}

namespace {

ControllerKind controller_from_string(const std::string& s) {
  if (s == "none") return ControllerKind::none;
  if (s == "follower_stopper") return ControllerKind::follower_stopper;
  if (s == "pi_saturation") return ControllerKind::pi_saturation;
  if (s == "human_avg") return ControllerKind::human_avg;
  throw InputError("unknown controller kind: " + s);
}

std::string controller_to_string(ControllerKind k) {
  switch (k) {
    case ControllerKind::none: return "none";
    case ControllerKind::follower_stopper: return "follower_stopper";
    case ControllerKind::pi_saturation: return "pi_saturation";
    case ControllerKind::human_avg: return "human_avg";
  }
  return "none";
}

ScenarioEvent::Kind event_kind_from_string(const std::string& s) {
  if (s == "activate_controller") return ScenarioEvent::Kind::activate_controller;
  if (s == "deactivate_controller") return ScenarioEvent::Kind::deactivate_controller;
  if (s == "set_desired_velocity") return ScenarioEvent::Kind::set_desired_velocity;
  if (s == "mark_interval") return ScenarioEvent::Kind::mark_interval;
  throw InputError("unknown event kind: " + s);
}

std::string event_kind_to_string(ScenarioEvent::Kind k) {
  switch (k) {
    case ScenarioEvent::Kind::activate_controller: return "activate_controller";
    case ScenarioEvent::Kind::deactivate_controller: return "deactivate_controller";
    case ScenarioEvent::Kind::set_desired_velocity: return "set_desired_velocity";
    case ScenarioEvent::Kind::mark_interval: return "mark_interval";
  }
  return "activate_controller";
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& ex) {
    throw InputError("scenario parse error: " + std::string(ex.what()));
  }
  try {
    Scenario s;
    maybe(j, "name", s.name);
    if (j.contains("track")) {
      maybe(j["track"], "circumference", s.track.circumference);
      maybe(j["track"], "lane_radius", s.track.lane_radius);
    }
    maybe(j, "duration", s.duration);
    maybe(j, "dt", s.dt);
    maybe(j, "seed", s.seed);
    maybe(j, "av_index", s.av_index);
    maybe(j, "strict_collisions", s.strict_collisions);
    maybe(j, "start_at_equilibrium", s.start_at_equilibrium);
    maybe(j, "gap_filter_time_constant", s.gap_filter_time_constant);
    maybe(j, "sensor_noise_std", s.sensor_noise_std);
    if (j.contains("controller")) s.controller = controller_from_string(j["controller"]);

    if (j.contains("fleet")) {
      s.fleet.clear();
      for (const auto& v : j["fleet"]) {
        VehicleSpec spec;
        maybe(v, "id", spec.id);
        maybe(v, "length", spec.length);
        if (v.contains("epa_city") && v.contains("epa_highway")) {
          spec.fuel = fuel_params_from_epa(v["epa_city"].get<double>(),
                                           v["epa_highway"].get<double>());
        }
        if (v.contains("fuel")) {
          maybe(v["fuel"], "idle_rate", spec.fuel.idle_rate);
          maybe(v["fuel"], "v_coeff", spec.fuel.v_coeff);
          maybe(v["fuel"], "drag_coeff", spec.fuel.drag_coeff);
          maybe(v["fuel"], "accel_coeff", spec.fuel.accel_coeff);
        }
        s.fleet.push_back(spec);
      }
    } else {
      std::string preset = "reference-21";
      maybe(j, "fleet_preset", preset);
      const auto dash = preset.find('-');
      if (preset.rfind("reference-", 0) != 0 || dash == std::string::npos) {
        throw InputError("unknown fleet preset: " + preset);
      }
      s.fleet = reference_fleet(std::stoi(preset.substr(dash + 1)));
    }

    if (j.contains("driver")) {
      const auto& d = j["driver"];
      maybe(d, "sensitivity", s.driver.sensitivity);
      maybe(d, "rate_sensitivity", s.driver.rate_sensitivity);
      maybe(d, "v_max", s.driver.v_max);
      maybe(d, "form_offset", s.driver.form_offset);
      maybe(d, "form_scale", s.driver.form_scale);
      maybe(d, "length_scale", s.driver.length_scale);
      maybe(d, "max_accel", s.driver.max_accel);
      maybe(d, "max_decel", s.driver.max_decel);
      maybe(d, "noise_std", s.driver.noise_std);
      maybe(d, "reaction_delay", s.driver.reaction_delay);
    }
    if (j.contains("follower_stopper")) {
      const auto& f = j["follower_stopper"];
      if (f.contains("dx0")) {
        for (int k = 0; k < 3; ++k) s.follower_stopper.dx0[k] = f["dx0"].at(k).get<double>();
      }
      if (f.contains("decel")) {
        for (int k = 0; k < 3; ++k) s.follower_stopper.decel[k] = f["decel"].at(k).get<double>();
      }
    }
    if (j.contains("pi_saturation")) {
      const auto& p = j["pi_saturation"];
      maybe(p, "window", s.pi_saturation.window);
      maybe(p, "gap_low", s.pi_saturation.gap_low);
      maybe(p, "gap_high", s.pi_saturation.gap_high);
      maybe(p, "v_catch", s.pi_saturation.v_catch);
      maybe(p, "gamma", s.pi_saturation.gamma);
      maybe(p, "safety_time", s.pi_saturation.safety_time);
      maybe(p, "safety_floor", s.pi_saturation.safety_floor);
      maybe(p, "safety_from_ego_speed", s.pi_saturation.safety_from_ego_speed);
    }
    if (j.contains("human_avg")) {
      const auto& h = j["human_avg"];
      maybe(h, "quantum", s.human_avg.quantum);
      maybe(h, "update_period", s.human_avg.update_period);
      maybe(h, "reaction_lag", s.human_avg.reaction_lag);
    }
    if (j.contains("actuation")) {
      const auto& a = j["actuation"];
      if (a.contains("plant")) {
        maybe(a["plant"], "time_constant", s.plant.time_constant);
        maybe(a["plant"], "gain", s.plant.gain);
      }
      const auto load_gains = [&](const char* key, PidGains& g) {
        if (!a.contains(key)) return;
        maybe(a[key], "kp", g.kp);
        maybe(a[key], "ki", g.ki);
        maybe(a[key], "kd", g.kd);
        maybe(a[key], "integrator_limit", g.integrator_limit);
      };
      load_gains("accel_gains", s.accel_gains);
      load_gains("brake_gains", s.brake_gains);
      maybe(a, "ideal", s.ideal_actuation);
      maybe(a, "ideal_rate_limit", s.ideal_rate_limit);
    }
    if (j.contains("events")) {
      for (const auto& e : j["events"]) {
        ScenarioEvent ev;
        ev.time = e.at("time").get<double>();
        ev.kind = event_kind_from_string(e.at("kind").get<std::string>());
        maybe(e, "value", ev.value);
        maybe(e, "label", ev.label);
        s.events.push_back(ev);
      }
      std::stable_sort(s.events.begin(), s.events.end(),
                       [](const auto& a, const auto& b) { return a.time < b.time; });
    }
    return s;
  } catch (const json::exception& ex) {
    throw InputError("scenario field error: " + std::string(ex.what()));
  }
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  json j;
  j["name"] = s.name;
  j["track"] = {{"circumference", s.track.circumference}, {"lane_radius", s.track.lane_radius}};
  j["duration"] = s.duration;
  j["dt"] = s.dt;
  j["seed"] = s.seed;
  j["av_index"] = s.av_index;
  j["controller"] = controller_to_string(s.controller);
  j["strict_collisions"] = s.strict_collisions;
  j["start_at_equilibrium"] = s.start_at_equilibrium;
  j["gap_filter_time_constant"] = s.gap_filter_time_constant;
  j["sensor_noise_std"] = s.sensor_noise_std;
  j["fleet_preset"] = "reference-" + std::to_string(s.fleet.size());
  j["driver"] = {{"sensitivity", s.driver.sensitivity},
                 {"rate_sensitivity", s.driver.rate_sensitivity},
                 {"v_max", s.driver.v_max},
                 {"form_offset", s.driver.form_offset},
                 {"form_scale", s.driver.form_scale},
                 {"length_scale", s.driver.length_scale},
                 {"max_accel", s.driver.max_accel},
                 {"max_decel", s.driver.max_decel},
                 {"noise_std", s.driver.noise_std},
                 {"reaction_delay", s.driver.reaction_delay}};
  j["follower_stopper"] = {{"dx0", {s.follower_stopper.dx0[0], s.follower_stopper.dx0[1],
                                    s.follower_stopper.dx0[2]}},
                           {"decel", {s.follower_stopper.decel[0], s.follower_stopper.decel[1],
                                      s.follower_stopper.decel[2]}}};
  j["pi_saturation"] = {{"window", s.pi_saturation.window},
                        {"gap_low", s.pi_saturation.gap_low},
                        {"gap_high", s.pi_saturation.gap_high},
                        {"v_catch", s.pi_saturation.v_catch},
                        {"gamma", s.pi_saturation.gamma},
                        {"safety_time", s.pi_saturation.safety_time},
                        {"safety_floor", s.pi_saturation.safety_floor},
                        {"safety_from_ego_speed", s.pi_saturation.safety_from_ego_speed}};
  j["human_avg"] = {{"quantum", s.human_avg.quantum},
                    {"update_period", s.human_avg.update_period},
                    {"reaction_lag", s.human_avg.reaction_lag}};
  j["actuation"] = {
      {"plant", {{"time_constant", s.plant.time_constant}, {"gain", s.plant.gain}}},
      {"accel_gains",
       {{"kp", s.accel_gains.kp}, {"ki", s.accel_gains.ki}, {"kd", s.accel_gains.kd},
        {"integrator_limit", s.accel_gains.integrator_limit}}},
      {"brake_gains",
       {{"kp", s.brake_gains.kp}, {"ki", s.brake_gains.ki}, {"kd", s.brake_gains.kd},
        {"integrator_limit", s.brake_gains.integrator_limit}}},
      {"ideal", s.ideal_actuation},
      {"ideal_rate_limit", s.ideal_rate_limit}};
  j["events"] = json::array();
  for (const auto& e : s.events) {
    json ev = {{"time", e.time}, {"kind", event_kind_to_string(e.kind)}};
    if (e.kind == ScenarioEvent::Kind::set_desired_velocity) ev["value"] = e.value;
    if (e.kind == ScenarioEvent::Kind::mark_interval) ev["label"] = e.label;
    j["events"].push_back(ev);
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace ringsim
