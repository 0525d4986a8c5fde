#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ringsim/fuel.hpp"
#include "ringsim/ring.hpp"
#include "ringsim/trajectory.hpp"

namespace ringsim {

// Half-open evaluation window [t_start, t_end). `controlled` marks windows
// where the wave-dampening controller was active.
struct Interval {
  std::string label;
  double t_start = 0.0;
  double t_end = 0.0;
  bool controlled = false;
};

struct ReportRow {
  Interval interval;
  double velocity_mean = 0.0;   // m/s
  double velocity_std = 0.0;    // m/s
  double fuel_per_100km = 0.0;  // liters/100km
  double braking_rate = 0.0;    // events/vehicle/km
  double throughput = 0.0;      // veh/hr
};

struct MetricsReport {
  std::vector<ReportRow> rows;
  double deceleration_tau = 0.0;       // braking threshold used, m/s^2
  std::optional<double> wave_onset;    // seconds
  int vehicle_count = 0;
  double circumference = 0.0;
};

// Mean velocity over one instantaneous frame of vehicles.
double spatial_mean_velocity(std::span<const VehicleState> frame);

// Pooled mean / sample standard deviation (divisor m*n - 1) over all
// vehicles and all samples in the interval.
double interval_velocity_mean(const TrajectoryDataset& data, const Interval& interval);
double interval_velocity_std(const TrajectoryDataset& data, const Interval& interval);

// Total liters consumed by the whole fleet in the interval divided by total
// distance traveled, normalized to liters per 100 km. Fuel-rate samples are
// integrated trapezoidally.
double interval_fuel_consumption(const TrajectoryDataset& data, const Interval& interval);

// Braking threshold: mean over vehicles of the per-vehicle sample standard
// deviation of acceleration within the wave interval.
double deceleration_threshold(const TrajectoryDataset& data, const Interval& wave_interval);

// Number of braking events in a deceleration trace. An event is a maximal
// contiguous region with -a > tau; adjacent regions merge when the valley
// between them does not drop more than tau below the lower peak, and an
// event only counts if its peak stands more than tau above both flanking
// valleys (series endpoints act as valleys with their own sample value).
int count_braking_peaks(std::span<const double> acceleration, double tau);

// Mean over vehicles of events per kilometer traveled within the interval.
double braking_event_rate(const TrajectoryDataset& data, const Interval& interval, double tau);

// q = density * mean velocity, in vehicles/hour.
double throughput(int vehicle_count, double circumference, double mean_velocity);

// First time the instantaneous cross-vehicle velocity standard deviation
// (divisor n-1) exceeds the threshold; nullopt if it never does.
std::optional<double> wave_onset_time(const TrajectoryDataset& data, double threshold = 2.5);

// All metrics for a set of intervals. tau comes from the interval labeled
// "waves" when present, otherwise from the whole run.
MetricsReport build_report(const TrajectoryDataset& data, std::span<const Interval> intervals,
                           int vehicle_count, double circumference);

// Percent change from the wave interval to the best (lowest velocity std)
// controlled interval, Table-style.
struct WsCaComparison {
  std::string ws_label;
  std::string ca_label;
  double velocity_mean_pct = 0.0;
  double velocity_std_pct = 0.0;
  double fuel_pct = 0.0;
  double braking_pct = 0.0;
  double throughput_pct = 0.0;
};

std::optional<WsCaComparison> ws_ca_comparison(const MetricsReport& report);

}  // namespace ringsim
