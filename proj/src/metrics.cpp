#include "ringsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ringsim {

namespace {

// Sample indices covered by [t_start, t_end). An interval whose end reaches
// the last sample time also claims that final sample, so a partition of
// [0, duration] covers every record exactly once.
struct IndexRange {
  std::size_t first;
  std::size_t end;  // exclusive
  std::size_t count() const { return end > first ? end - first : 0; }
};

IndexRange index_range(const TrajectoryDataset& data, const Interval& iv) {
  const std::size_t m = data.sample_count();
  if (m == 0) return {0, 0};
  const double dt = data.dt;
  const auto clamp_idx = [m](double x) {
    if (x < 0.0) return std::size_t{0};
    if (x > static_cast<double>(m)) return m;
    return static_cast<std::size_t>(x);
  };
  const std::size_t first = clamp_idx(std::ceil(iv.t_start / dt - 1e-9));
  std::size_t end = clamp_idx(std::ceil(iv.t_end / dt - 1e-9));
  if (iv.t_end >= data.duration() - 0.5 * dt) end = m;
  if (end < first) end = first;
  return {first, end};
}

void require_vehicles(const TrajectoryDataset& data, const char* who) {
  if (data.vehicles.empty()) {
    throw std::invalid_argument(std::string(who) + ": dataset has no vehicles");
  }
}

double sample_std(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 2) throw std::invalid_argument("sample_std: need at least two samples");
  double sum = 0.0, sumsq = 0.0;
  for (double x : xs) {
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / static_cast<double>(n);
  const double var = std::max(0.0, (sumsq - static_cast<double>(n) * mean * mean) /
                                       (static_cast<double>(n) - 1.0));
  return std::sqrt(var);
}

}  // namespace

double spatial_mean_velocity(std::span<const VehicleState> frame) {
  if (frame.empty()) throw std::invalid_argument("spatial_mean_velocity: empty frame");
  double sum = 0.0;
  for (const auto& v : frame) sum += v.velocity;
  return sum / static_cast<double>(frame.size());
}

double interval_velocity_mean(const TrajectoryDataset& data, const Interval& interval) {
  require_vehicles(data, "interval_velocity_mean");
  const IndexRange r = index_range(data, interval);
  if (r.count() == 0) throw std::invalid_argument("interval_velocity_mean: empty interval");
  double sum = 0.0;
  for (const auto& veh : data.vehicles) {
    for (std::size_t j = r.first; j < r.end; ++j) sum += veh.velocity[j];
  }
  return sum / (static_cast<double>(r.count()) * static_cast<double>(data.vehicle_count()));
}

double interval_velocity_std(const TrajectoryDataset& data, const Interval& interval) {
  require_vehicles(data, "interval_velocity_std");
  const IndexRange r = index_range(data, interval);
  const std::size_t total = r.count() * data.vehicle_count();
  if (total < 2) throw std::invalid_argument("interval_velocity_std: fewer than two samples");
  double sum = 0.0, sumsq = 0.0;
  for (const auto& veh : data.vehicles) {
    for (std::size_t j = r.first; j < r.end; ++j) {
      sum += veh.velocity[j];
      sumsq += veh.velocity[j] * veh.velocity[j];
    }
  }
  const double mean = sum / static_cast<double>(total);
  const double var = std::max(
      0.0, (sumsq - static_cast<double>(total) * mean * mean) / (static_cast<double>(total) - 1.0));
  return std::sqrt(var);
}

double interval_fuel_consumption(const TrajectoryDataset& data, const Interval& interval) {
  require_vehicles(data, "interval_fuel_consumption");
  const IndexRange r = index_range(data, interval);
  if (r.count() < 2) throw std::invalid_argument("interval_fuel_consumption: empty interval");
  double liters = 0.0;
  double meters = 0.0;
  for (const auto& veh : data.vehicles) {
    for (std::size_t j = r.first; j + 1 < r.end; ++j) {
      liters += 0.5 * (veh.fuel_rate[j] + veh.fuel_rate[j + 1]) * data.dt;
    }
    meters += veh.position[r.end - 1] - veh.position[r.first];
  }
  if (!(meters > 0.0)) throw std::invalid_argument("interval_fuel_consumption: zero distance");
  return liters / meters * 1.0e5;
}

double deceleration_threshold(const TrajectoryDataset& data, const Interval& wave_interval) {
  require_vehicles(data, "deceleration_threshold");
  const IndexRange r = index_range(data, wave_interval);
  if (r.count() < 2) throw std::invalid_argument("deceleration_threshold: empty interval");
  double sum = 0.0;
  for (const auto& veh : data.vehicles) {
    sum += sample_std(std::span<const double>(veh.acceleration).subspan(r.first, r.count()));
  }
  return sum / static_cast<double>(data.vehicle_count());
}

int count_braking_peaks(std::span<const double> acceleration, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("count_braking_peaks: tau must be positive");
  const std::size_t m = acceleration.size();
  const auto s = [&](std::size_t k) { return -acceleration[k]; };

  struct Event {
    std::size_t begin, end;  // [begin, end) with s > tau throughout
    double peak;
  };
  std::vector<Event> events;

  std::size_t k = 0;
  while (k < m) {
    if (!(s(k) > tau)) {
      ++k;
      continue;
    }
    std::size_t begin = k;
    double peak = s(k);
    while (k < m && s(k) > tau) {
      peak = std::max(peak, s(k));
      ++k;
    }
    // Merge with earlier events while the valley between fails to drop more
    // than tau below the lower of the two peaks.
    while (!events.empty()) {
      double valley = std::numeric_limits<double>::infinity();
      for (std::size_t j = events.back().end; j < begin; ++j) valley = std::min(valley, s(j));
      if (std::min(events.back().peak, peak) - valley <= tau) {
        begin = events.back().begin;
        peak = std::max(peak, events.back().peak);
        events.pop_back();
      } else {
        break;
      }
    }
    events.push_back({begin, k, peak});
  }

  if (events.empty()) return 0;
  // Interior flanks pass by construction of the merge; only the outermost
  // flanks need the prominence check. A truncated series acts as its own
  // valley (flank value = the endpoint sample).
  int count = 0;
  for (std::size_t e = 0; e < events.size(); ++e) {
    bool ok = true;
    if (e == 0) {
      double left = s(0);
      for (std::size_t j = 0; j < events[e].begin; ++j) left = std::min(left, s(j));
      ok = ok && (events[e].peak - left > tau);
    }
    if (e + 1 == events.size()) {
      double right = s(m - 1);
      for (std::size_t j = events[e].end; j < m; ++j) right = std::min(right, s(j));
      ok = ok && (events[e].peak - right > tau);
    }
    if (ok) ++count;
  }
  return count;
}

double braking_event_rate(const TrajectoryDataset& data, const Interval& interval, double tau) {
  require_vehicles(data, "braking_event_rate");
  const IndexRange r = index_range(data, interval);
  if (r.count() < 2) throw std::invalid_argument("braking_event_rate: empty interval");
  double sum = 0.0;
  for (const auto& veh : data.vehicles) {
    const double meters = veh.position[r.end - 1] - veh.position[r.first];
    if (!(meters > 0.0)) {
      throw std::invalid_argument("braking_event_rate: vehicle traveled zero distance");
    }
    const int peaks = count_braking_peaks(
        std::span<const double>(veh.acceleration).subspan(r.first, r.count()), tau);
    sum += static_cast<double>(peaks) / (meters / 1000.0);
  }
  return sum / static_cast<double>(data.vehicle_count());
}

double throughput(int vehicle_count, double circumference, double mean_velocity) {
  if (!(circumference > 0.0)) throw std::invalid_argument("throughput: circumference must be positive");
  return static_cast<double>(vehicle_count) / circumference * mean_velocity * 3600.0;
}

std::optional<double> wave_onset_time(const TrajectoryDataset& data, double threshold) {
  if (!(threshold >= 0.0)) throw std::invalid_argument("wave_onset_time: negative threshold");
  const std::size_t n = data.vehicle_count();
  if (n < 2) return std::nullopt;
  const std::size_t m = data.sample_count();
  std::vector<double> frame(n);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < n; ++i) frame[i] = data.vehicles[i].velocity[j];
    if (sample_std(frame) > threshold) return data.time_at(j);
  }
  return std::nullopt;
}

MetricsReport build_report(const TrajectoryDataset& data, std::span<const Interval> intervals,
                           int vehicle_count, double circumference) {
  MetricsReport report;
  report.vehicle_count = vehicle_count;
  report.circumference = circumference;
  report.wave_onset = wave_onset_time(data);

  // tau from the wave interval; fall back to the whole run when no usable
  // wave interval exists.
  const Interval* wave = nullptr;
  for (const auto& iv : intervals) {
    if (iv.label == "waves" && index_range(data, iv).count() >= 2) {
      wave = &iv;
      break;
    }
  }
  if (wave != nullptr) {
    report.deceleration_tau = deceleration_threshold(data, *wave);
  } else if (data.sample_count() >= 2) {
    Interval whole{"all", 0.0, data.duration() + data.dt, false};
    report.deceleration_tau = deceleration_threshold(data, whole);
  }

  for (const auto& iv : intervals) {
    if (index_range(data, iv).count() < 2) continue;  // degenerate segment
    ReportRow row;
    row.interval = iv;
    row.velocity_mean = interval_velocity_mean(data, iv);
    row.velocity_std = interval_velocity_std(data, iv);
    // Full-standstill segments have no distance base; report zeros rather
    // than failing the whole report.
    try {
      row.fuel_per_100km = interval_fuel_consumption(data, iv);
    } catch (const std::invalid_argument&) {
      row.fuel_per_100km = 0.0;
    }
    try {
      row.braking_rate = report.deceleration_tau > 0.0
                             ? braking_event_rate(data, iv, report.deceleration_tau)
                             : 0.0;
    } catch (const std::invalid_argument&) {
      row.braking_rate = 0.0;
    }
    row.throughput = throughput(vehicle_count, circumference, row.velocity_mean);
    report.rows.push_back(row);
  }
  return report;
}

std::optional<WsCaComparison> ws_ca_comparison(const MetricsReport& report) {
  const ReportRow* ws = nullptr;
  const ReportRow* ca = nullptr;
  for (const auto& row : report.rows) {
    if (row.interval.label == "waves") ws = &row;
    if (row.interval.controlled && (ca == nullptr || row.velocity_std < ca->velocity_std)) {
      ca = &row;
    }
  }
  if (ws == nullptr || ca == nullptr) return std::nullopt;
  const auto pct = [](double from, double to) {
    return from == 0.0 ? 0.0 : (to - from) / from * 100.0;
  };
  WsCaComparison c;
  c.ws_label = ws->interval.label;
  c.ca_label = ca->interval.label;
  c.velocity_mean_pct = pct(ws->velocity_mean, ca->velocity_mean);
  c.velocity_std_pct = pct(ws->velocity_std, ca->velocity_std);
  c.fuel_pct = pct(ws->fuel_per_100km, ca->fuel_per_100km);
  c.braking_pct = pct(ws->braking_rate, ca->braking_rate);
  c.throughput_pct = pct(ws->throughput, ca->throughput);
  return c;
}

}  // namespace ringsim
