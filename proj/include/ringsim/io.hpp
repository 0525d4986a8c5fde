#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ringsim/experiment.hpp"
#include "ringsim/metrics.hpp"
#include "ringsim/trajectory.hpp"

namespace ringsim {

// Trajectory interchange format. Header:
//   time,vehicle_id,position_m,velocity_mps,accel_mps2,fuel_lps,v_cmd_mps
// Rows sorted by (time, vehicle_id), plain decimal with six decimals, the
// v_cmd field left empty for uncontrolled rows. Deterministic byte-for-byte
// for a given dataset.
void export_csv(const TrajectoryDataset& data, const std::filesystem::path& path);

struct ImportOptions {
  double expected_dt = 0.0;       // 0 = infer from the time column
  double smoothing_window = 0.5;  // seconds, centered moving average
  double jitter_tolerance = 0.01; // fraction of dt
  // Column name overrides for externally produced files.
  std::string time_column = "time";
  std::string vehicle_column = "vehicle_id";
  std::string position_column = "position_m";
  std::string velocity_column = "velocity_mps";
  std::string accel_column = "accel_mps2";
  std::string fuel_column = "fuel_lps";
  std::string command_column = "v_cmd_mps";
};

// Reads a trajectory CSV. Velocity and acceleration columns are optional:
// missing velocity is derived as a smoothed central difference of position,
// and missing acceleration likewise from velocity. Unknown columns are
// ignored; non-uniform sampling beyond the jitter tolerance is an error.
TrajectoryDataset import_displacement(const std::filesystem::path& path,
                                      const ImportOptions& options = {});

// Report rendering. The CSV has one row per interval plus a percent-change
// row from the wave interval to the best controlled interval when both
// exist. The text table mirrors the CSV for human reading.
void write_report_csv(const MetricsReport& report, const std::filesystem::path& path);
std::string render_report_text(const MetricsReport& report);

void write_intervals_csv(const std::vector<Interval>& intervals,
                         const std::filesystem::path& path);
std::vector<Interval> read_intervals_csv(const std::filesystem::path& path);

// Scenario files are JSON with a documented key set; see the shipped
// templates. Unknown controller kinds or malformed values raise InputError.
Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& s, const std::filesystem::path& path);

}  // namespace ringsim
