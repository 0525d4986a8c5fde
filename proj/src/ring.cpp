#include "ringsim/ring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ringsim {

double wrap_position(double x, double circumference) {
  if (!(circumference > 0.0)) {
    throw std::invalid_argument("wrap_position: circumference must be positive");
  }
  if (!std::isfinite(x)) {
    throw std::invalid_argument("wrap_position: non-finite position");
  }
  double r = std::fmod(x, circumference);
  if (r < 0.0) r += circumference;
  // fmod can return exactly L for tiny negative x; keep the half-open range.
  if (r >= circumference) r = 0.0;
  return r;
}

double gap(const WorldState& world, std::span<const VehicleSpec> specs, std::size_t i,
           double circumference) {
  const std::size_t n = world.vehicles.size();
  if (n < 2) throw std::invalid_argument("gap: need at least two vehicles");
  if (specs.size() != n) throw std::invalid_argument("gap: specs/world size mismatch");
  const std::size_t lead = (i + 1) % n;
  // Arc from follower front bumper to lead front bumper, then back off the
  // lead body length. Negative result = follower front inside the lead body.
  const double arc =
      wrap_position(world.vehicles[lead].position - world.vehicles[i].position, circumference);
  return arc - specs[lead].length;
}

std::vector<double> all_gaps(const WorldState& world, std::span<const VehicleSpec> specs,
                             double circumference) {
  std::vector<double> out(world.vehicles.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = gap(world, specs, i, circumference);
  return out;
}

std::optional<std::size_t> first_overlap(const WorldState& world,
                                         std::span<const VehicleSpec> specs,
                                         double circumference) {
  for (std::size_t i = 0; i < world.vehicles.size(); ++i) {
    if (gap(world, specs, i, circumference) < 0.0) return i;
  }
  return std::nullopt;
}

WorldState uniform_initialization(const RingTrack& track, std::span<const VehicleSpec> specs) {
  const std::size_t n = specs.size();
  if (n < 2) throw std::invalid_argument("uniform_initialization: need at least two vehicles");
  const double L = track.circumference;
  double total_length = 0.0;
  double max_length = 0.0;
  for (const auto& s : specs) {
    if (!(s.length > 0.0)) throw std::invalid_argument("uniform_initialization: vehicle length <= 0");
    total_length += s.length;
    max_length = std::max(max_length, s.length);
  }
  if (!(L > total_length)) {
    throw std::invalid_argument("uniform_initialization: circumference does not exceed fleet length");
  }
  const double spacing = L / static_cast<double>(n);
  if (spacing < max_length) {
    throw std::invalid_argument("uniform_initialization: cannot pack fleet at uniform spacing");
  }
  WorldState world;
  world.time = 0.0;
  world.vehicles.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    world.vehicles[i].position = wrap_position(spacing * static_cast<double>(i), L);
  }
  return world;
}

WorldState step_world(const WorldState& world, std::span<const double> accelerations,
                      double dt, double circumference) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_world: dt must be positive");
  if (accelerations.size() != world.vehicles.size()) {
    throw std::invalid_argument("step_world: acceleration count mismatch");
  }
  WorldState next = world;
  next.time = world.time + dt;
  for (std::size_t i = 0; i < world.vehicles.size(); ++i) {
    auto& v = next.vehicles[i];
    const double v_new = std::max(0.0, world.vehicles[i].velocity + accelerations[i] * dt);
    v.velocity = v_new;
    v.position = wrap_position(world.vehicles[i].position + v_new * dt, circumference);
    v.acceleration = accelerations[i];
  }
  return next;
}

}  // namespace ringsim
