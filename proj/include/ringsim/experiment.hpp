#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ringsim/actuation.hpp"
#include "ringsim/controller.hpp"
#include "ringsim/driver.hpp"
#include "ringsim/metrics.hpp"
#include "ringsim/ring.hpp"
#include "ringsim/trajectory.hpp"

namespace ringsim {

enum class ControllerKind { none, follower_stopper, pi_saturation, human_avg };

struct ScenarioEvent {
  enum class Kind { activate_controller, deactivate_controller, set_desired_velocity, mark_interval };
  double time = 0.0;
  Kind kind = Kind::activate_controller;
  double value = 0.0;   // set_desired_velocity payload, m/s
  std::string label;    // mark_interval payload
};

// Everything a run needs: track, fleet, driver calibration, controller
// choice and parameters, the timed event schedule, and the RNG seed.
struct Scenario {
  std::string name = "scenario";
  RingTrack track;
  std::vector<VehicleSpec> fleet;
  OvmParams driver;
  int av_index = 0;
  ControllerKind controller = ControllerKind::none;
  FollowerStopperConfig follower_stopper;
  PiSatConfig pi_saturation;
  HumanAvgConfig human_avg;
  PidGains accel_gains = default_accel_gains();
  PidGains brake_gains = default_brake_gains();
  PlantParams plant;
  bool ideal_actuation = false;
  double ideal_rate_limit = 6.0;      // m/s^2
  double gap_filter_time_constant = 0.3;  // seconds
  double sensor_noise_std = 0.0;      // meters, on the raw gap
  std::vector<ScenarioEvent> events;  // sorted by time
  double duration = 300.0;            // seconds
  double dt = 0.05;                   // seconds
  std::uint64_t seed = 1;
  bool strict_collisions = true;
  // Start every vehicle at its gap's preferred speed instead of at rest
  // (holds a homogeneous ring exactly at equilibrium).
  bool start_at_equilibrium = false;
};

// Scenario sanity problems that do not prevent running (e.g. controller
// activation earlier than 45 s, before unsteady traffic can develop).
std::vector<std::string> validate_scenario(const Scenario& s);

// Run one scenario to completion (or to the first collision in strict
// mode, in which case the dataset is marked aborted and holds the partial
// trajectory). Deterministic: same scenario and seed give identical output.
TrajectoryDataset run_scenario(const Scenario& s);

// The three published experiment schedules.
Scenario experiment_a_template();  // 21 vehicles, FollowerStopper, stepped setpoints
Scenario experiment_b_template();  // 21 vehicles, human-executed control
Scenario experiment_c_template();  // 22 vehicles, PI with saturation

// Interval segmentation for reporting: run start, detector-located wave
// onset, one segment per controller activation/setpoint change, and the
// post-deactivation tail.
std::vector<Interval> segment_intervals(const TrajectoryDataset& data, const Scenario& s,
                                        double wave_threshold = 2.5);

// Segmentation for imported data without a scenario: uses the av_command
// presence for controller boundaries and the wave detector for onset.
std::vector<Interval> auto_intervals(const TrajectoryDataset& data, double wave_threshold = 2.5);

struct SweepResult {
  std::uint64_t seed = 0;
  MetricsReport report;
  bool aborted = false;
  std::string abort_reason;
};

// Independent runs of the same scenario under different seeds; results are
// ordered like `seeds` regardless of execution interleaving. Per-run
// failures are captured, not propagated.
std::vector<SweepResult> seed_sweep(const Scenario& s, std::span<const std::uint64_t> seeds,
                                    int jobs = 1);

}  // namespace ringsim
