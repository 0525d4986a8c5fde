#pragma once

#include <cstdint>
#include <deque>

#include "ringsim/random.hpp"

namespace ringsim {

// Optimal-velocity car-following surrogate for the human drivers, with a
// closing-rate anticipation term (pure optimal-velocity following ignores a
// stopped lead until the gap itself is short, which ends in rear-end
// collisions once deep waves form). The default calibration is
// string-unstable at ring densities around 21 vehicles / 260 m, so
// stop-and-go waves grow from small perturbations.
struct OvmParams {
  double sensitivity = 1.0;      // 1/s, relaxation toward the preferred speed
  double rate_sensitivity = 0.8; // 1/s, response to d/dt gap (anticipation)
  double v_max = 12.0;           // m/s, open-road preferred speed
  double form_offset = 1.5;      // dimensionless (c1)
  double form_scale = 1.0;       // dimensionless (c2)
  double length_scale = 4.0;     // meters (d0)
  double max_accel = 2.0;        // m/s^2
  double max_decel = 8.0;        // m/s^2 (magnitude, panic braking)
  double noise_std = 0.05;       // m/s^2 actuation noise
  double reaction_delay = 0.2;   // seconds
};

// Preferred speed for a given gap, clamped to [0, v_max]. Monotone
// nondecreasing in the gap.
double optimal_velocity(double gap, const OvmParams& p);

// Analytic derivative dV/dgap of the clamped preferred-speed curve.
double optimal_velocity_gradient(double gap, const OvmParams& p);

// Pure car-following law without delay or noise:
// clamp(sensitivity * (V(gap) - v), -max_decel, +max_accel).
double ovm_acceleration(double gap, double v, const OvmParams& p);

// V'(gap*) - sensitivity/2 - rate_sensitivity. Positive means the uniform
// flow at that gap is linearly string-unstable and perturbations grow into
// waves. With rate_sensitivity = 0 this reduces to the classical
// optimal-velocity criterion.
double string_stability_margin(const OvmParams& p, double equilibrium_gap);

// Stateful per-driver wrapper: perceives the gap through the reaction-delay
// buffer, estimates the closing rate from consecutive delayed observations,
// and adds Gaussian actuation noise from a private, deterministic stream.
class OvmDriver {
 public:
  OvmDriver(const OvmParams& params, std::uint64_t noise_seed, double dt);

  // Push the current observation, produce the acceleration for this tick.
  double step(double gap, double velocity);

  void reset();

 private:
  OvmParams params_;
  std::size_t delay_ticks_;
  double dt_;
  std::deque<double> gap_history_;
  Rng rng_;
};

}  // namespace ringsim
