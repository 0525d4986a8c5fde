#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ringsim/fuel.hpp"

namespace ringsim {

// Single-lane circular track. Positions are arc length along the lane
// centerline, increasing in the driving direction.
struct RingTrack {
  double circumference = 260.0;  // meters
  double lane_radius = 41.4;     // meters, informational
};

struct VehicleSpec {
  int id = 0;
  double length = 5.0;  // meters
  FuelModelParams fuel;
};

// Kinematic state of one vehicle at a tick. `position` is the arc position
// of the front bumper, wrapped to [0, circumference).
struct VehicleState {
  double position = 0.0;      // meters, front bumper
  double velocity = 0.0;      // m/s, >= 0
  double acceleration = 0.0;  // m/s^2
  double fuel_rate = 0.0;     // liters/s
};

// Vehicles are stored in ring order: vehicle i follows vehicle (i+1) % n.
struct WorldState {
  double time = 0.0;
  std::vector<VehicleState> vehicles;
  std::size_t size() const { return vehicles.size(); }
};

// Wraps an arc position into [0, L). Throws on non-finite input.
double wrap_position(double x, double circumference);

// Front-bumper-to-lead-rear-bumper distance for vehicle i. A negative value
// means the follower's front bumper is inside the lead vehicle's body
// (overlap); callers treat that as a collision.
double gap(const WorldState& world, std::span<const VehicleSpec> specs, std::size_t i,
           double circumference);

std::vector<double> all_gaps(const WorldState& world, std::span<const VehicleSpec> specs,
                             double circumference);

// Index of the first overlapping follower, if any.
std::optional<std::size_t> first_overlap(const WorldState& world,
                                         std::span<const VehicleSpec> specs,
                                         double circumference);

// Front bumpers equally spaced at i*L/n, all vehicles at rest, t = 0.
// Throws if the fleet cannot be packed at that spacing.
WorldState uniform_initialization(const RingTrack& track, std::span<const VehicleSpec> specs);

// Semi-implicit Euler: v' = max(0, v + a*dt), x' = wrap(x + v'*dt).
// Velocity is clamped at zero; vehicles never reverse.
WorldState step_world(const WorldState& world, std::span<const double> accelerations,
                      double dt, double circumference);

}  // namespace ringsim
