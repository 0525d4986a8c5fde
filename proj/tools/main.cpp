// Command line front end: simulate scenarios, ship templates, analyze
// trajectory files, run seed sweeps, and validate the low-level controller.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ringsim/actuation.hpp"
#include "ringsim/errors.hpp"
#include "ringsim/experiment.hpp"
#include "ringsim/io.hpp"
#include "ringsim/metrics.hpp"

using namespace ringsim;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadInput = 2;
constexpr int kExitCollision = 3;
constexpr int kExitIo = 4;

fs::path resolve_out_dir(const std::string& cli_value) {
  if (!cli_value.empty()) return cli_value;
  if (const char* env = std::getenv("RINGSIM_OUT")) return env;
  return ".";
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory: " + dir.string());
}

int run_simulate(const std::string& scenario_path, long long seed_override,
                 const std::string& out, bool quiet) {
  Scenario s = load_scenario(scenario_path);
  if (seed_override >= 0) s.seed = static_cast<std::uint64_t>(seed_override);
  for (const auto& w : validate_scenario(s)) {
    if (!quiet) std::fprintf(stderr, "warning: %s\n", w.c_str());
  }
  const fs::path dir = resolve_out_dir(out);
  ensure_dir(dir);

  const TrajectoryDataset data = run_scenario(s);
  export_csv(data, dir / "trajectory.csv");
  const auto intervals = segment_intervals(data, s);
  write_intervals_csv(intervals, dir / "intervals.csv");
  const auto report =
      build_report(data, intervals, static_cast<int>(s.fleet.size()), s.track.circumference);
  write_report_csv(report, dir / "report.csv");
  if (!quiet) std::fputs(render_report_text(report).c_str(), stdout);

  if (data.aborted) {
    std::fprintf(stderr, "aborted: %s (partial outputs written to %s)\n",
                 data.abort_reason.c_str(), dir.string().c_str());
    return kExitCollision;
  }
  if (!quiet) std::fprintf(stderr, "outputs written to %s\n", dir.string().c_str());
  return kExitOk;
}

int run_template(const std::string& which, const std::string& out_file) {
  Scenario s;
  if (which == "a") {
    s = experiment_a_template();
  } else if (which == "b") {
    s = experiment_b_template();
  } else if (which == "c") {
    s = experiment_c_template();
  } else {
    throw InputError("unknown template: " + which + " (expected a, b, or c)");
  }
  save_scenario(s, out_file);
  return kExitOk;
}

int run_analyze(const std::string& csv_path, const std::string& intervals_path,
                bool auto_intervals_flag, double wave_threshold, double circumference,
                const std::string& out, bool quiet) {
  const TrajectoryDataset data = import_displacement(csv_path);
  std::vector<Interval> intervals;
  if (!intervals_path.empty()) {
    intervals = read_intervals_csv(intervals_path);
  } else if (auto_intervals_flag) {
    intervals = auto_intervals(data, wave_threshold);
  } else {
    intervals.push_back({"all", 0.0, data.duration() + data.dt, false});
    if (const auto onset = wave_onset_time(data, wave_threshold)) {
      intervals.clear();
      intervals.push_back({"start", 0.0, *onset, false});
      intervals.push_back({"waves", *onset, data.duration() + data.dt, false});
    }
  }
  const auto report = build_report(data, intervals,
                                   static_cast<int>(data.vehicle_count()), circumference);
  const fs::path dir = resolve_out_dir(out);
  ensure_dir(dir);
  write_report_csv(report, dir / "report.csv");
  if (!quiet) std::fputs(render_report_text(report).c_str(), stdout);
  return kExitOk;
}

int run_sweep(const std::string& scenario_path, int n_seeds, int jobs, long long seed_base,
              const std::string& out, bool quiet) {
  Scenario s = load_scenario(scenario_path);
  const std::uint64_t base = seed_base >= 0 ? static_cast<std::uint64_t>(seed_base) : s.seed;
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(n_seeds));
  for (int k = 0; k < n_seeds; ++k) seeds[static_cast<std::size_t>(k)] = base + k;

  const fs::path dir = resolve_out_dir(out);
  ensure_dir(dir);
  const auto results = seed_sweep(s, seeds, jobs);

  std::ofstream agg(dir / "aggregate.csv", std::ios::binary);
  if (!agg) throw IoError("cannot open for writing: " + (dir / "aggregate.csv").string());
  agg << "seed,aborted,wave_onset_s,std_pct,fuel_pct,braking_pct,throughput_pct\n";
  for (std::size_t k = 0; k < results.size(); ++k) {
    const auto& r = results[k];
    write_report_csv(r.report, dir / ("report_seed" + std::to_string(k) + ".csv"));
    agg << r.seed << ',' << (r.aborted ? 1 : 0) << ',';
    if (r.report.wave_onset) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.2f", *r.report.wave_onset);
      agg << buf;
    }
    if (const auto cmp = ws_ca_comparison(r.report)) {
      char buf[128];
      std::snprintf(buf, sizeof(buf), ",%.2f,%.2f,%.2f,%.2f", cmp->velocity_std_pct,
                    cmp->fuel_pct, cmp->braking_pct, cmp->throughput_pct);
      agg << buf;
    } else {
      agg << ",,,,";
    }
    agg << '\n';
    if (!quiet && r.aborted) {
      std::fprintf(stderr, "seed %llu aborted: %s\n",
                   static_cast<unsigned long long>(r.seed), r.abort_reason.c_str());
    }
  }
  if (!quiet) {
    std::fprintf(stderr, "%zu runs, outputs in %s\n", results.size(), dir.string().c_str());
  }
  return kExitOk;
}

int run_step_response(const std::string& which, const std::string& out, bool quiet) {
  const bool brake = which == "h2";
  if (!brake && which != "h1") throw InputError("expected h1 or h2, got " + which);
  const double dt = 0.05;
  const double v0 = brake ? 7.5 : 6.5;
  const double step = brake ? -1.0 : 1.0;

  Actuator act;
  double v = v0;
  for (int k = 0; k < 4000; ++k) v += act.step(v, v0, dt) * dt;
  std::vector<double> trace{v};
  const fs::path dir = resolve_out_dir(out);
  ensure_dir(dir);
  std::ofstream csv(dir / ("step_" + which + ".csv"), std::ios::binary);
  csv << "time,velocity,pedal\n";
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f\n", 0.0, v, act.pedal());
  csv << buf;
  for (int k = 1; k <= static_cast<int>(25.0 / dt); ++k) {
    v += act.step(v, v0 + step, dt) * dt;
    trace.push_back(v);
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f\n", k * dt, v, act.pedal());
    csv << buf;
  }
  const auto m = step_response_metrics(trace, dt, v0, step);
  if (!quiet) {
    std::printf("%s step %+.1f m/s: rise(10-90) %.2f s, overshoot %.1f%%, settle(2%%) %.2f s\n",
                which.c_str(), step, m.rise_time_10_90, m.overshoot_pct, m.settling_2pct);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ring-road traffic microsimulation and single-vehicle flow control"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("--quiet", quiet, "suppress progress and report output");

  auto* sim = app.add_subcommand("simulate", "run a scenario file");
  std::string sim_scenario, sim_out;
  long long sim_seed = -1;
  sim->add_option("scenario", sim_scenario, "scenario JSON file")->required();
  sim->add_option("--seed", sim_seed, "override the scenario seed");
  sim->add_option("--out", sim_out, "output directory (default $RINGSIM_OUT or .)");

  auto* tpl = app.add_subcommand("template", "write a built-in experiment scenario");
  std::string tpl_which, tpl_out;
  tpl->add_option("which", tpl_which, "a, b, or c")->required();
  tpl->add_option("--out", tpl_out, "output file")->required();

  auto* ana = app.add_subcommand("analyze", "compute metrics from a trajectory CSV");
  std::string ana_csv, ana_intervals, ana_out;
  bool ana_auto = false;
  double ana_threshold = 2.5, ana_circumference = 260.0;
  ana->add_option("trajectory", ana_csv, "trajectory CSV file")->required();
  ana->add_option("--intervals", ana_intervals, "intervals CSV (label,t_start,t_end,controlled)");
  ana->add_flag("--auto-intervals", ana_auto, "segment by controller activity and wave onset");
  ana->add_option("--wave-threshold", ana_threshold, "wave detector threshold, m/s");
  ana->add_option("--circumference", ana_circumference, "track length for throughput, m");
  ana->add_option("--out", ana_out, "output directory");

  auto* swp = app.add_subcommand("sweep", "run a scenario across consecutive seeds");
  std::string swp_scenario, swp_out;
  int swp_seeds = 10, swp_jobs = 1;
  long long swp_base = -1;
  swp->add_option("scenario", swp_scenario, "scenario JSON file")->required();
  swp->add_option("--seeds", swp_seeds, "number of seeds")->required();
  swp->add_option("--jobs", swp_jobs, "worker threads");
  swp->add_option("--seed-base", swp_base, "first seed (default: scenario seed)");
  swp->add_option("--out", swp_out, "output directory");

  auto* stp = app.add_subcommand("step-response", "closed-loop actuation validation");
  std::string stp_which, stp_out;
  stp->add_option("which", stp_which, "h1 (accelerate) or h2 (brake)")->required();
  stp->add_option("--out", stp_out, "output directory");

  for (auto* sub : {sim, tpl, ana, swp, stp}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitBadInput;
  }

  try {
    if (sim->parsed()) return run_simulate(sim_scenario, sim_seed, sim_out, quiet);
    if (tpl->parsed()) return run_template(tpl_which, tpl_out);
    if (ana->parsed()) {
      return run_analyze(ana_csv, ana_intervals, ana_auto, ana_threshold, ana_circumference,
                         ana_out, quiet);
    }
    if (swp->parsed()) return run_sweep(swp_scenario, swp_seeds, swp_jobs, swp_base, swp_out, quiet);
    if (stp->parsed()) return run_step_response(stp_which, stp_out, quiet);
  } catch (const IoError& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return kExitIo;
  } catch (const InputError& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return kExitBadInput;
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return kExitBadInput;
  }
  return kExitOk;
}
