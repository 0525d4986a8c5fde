#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace ringsim {

// Time-indexed per-vehicle records, uniformly sampled. Positions are
// unwrapped cumulative arc length (laps unrolled) so distance traveled is a
// plain difference.
struct VehicleSeries {
  int id = 0;
  std::vector<double> position;      // meters, unwrapped
  std::vector<double> velocity;      // m/s
  std::vector<double> acceleration;  // m/s^2
  std::vector<double> fuel_rate;     // liters/s
};

struct LoggedEvent {
  double time = 0.0;
  std::string description;
};

struct TrajectoryDataset {
  double dt = 0.05;
  std::vector<VehicleSeries> vehicles;
  // Commanded velocity of the controlled vehicle per sample; NaN while no
  // controller is active. Empty when the dataset has no controlled vehicle.
  std::vector<double> av_command;
  int av_index = -1;
  std::vector<LoggedEvent> events;
  bool aborted = false;
  std::string abort_reason;

  std::size_t sample_count() const {
    return vehicles.empty() ? 0 : vehicles.front().velocity.size();
  }
  std::size_t vehicle_count() const { return vehicles.size(); }
  double time_at(std::size_t j) const { return static_cast<double>(j) * dt; }
  double duration() const { return sample_count() == 0 ? 0.0 : time_at(sample_count() - 1); }
};

}  // namespace ringsim
