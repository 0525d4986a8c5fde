#pragma once

#include <span>

namespace ringsim {

// First-order longitudinal plant: pedal input maps to a steady-state speed
// of gain * pedal, approached with the given time constant. Pedal range is
// [-100, 100]; negative values are brake, positive accelerator.
struct PlantParams {
  double time_constant = 6.0;  // seconds
  double gain = 0.35;          // (m/s) per pedal unit
  double pedal_min = -100.0;
  double pedal_max = 100.0;
};

struct PidGains {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
  double integrator_limit = 200.0;  // clamp on |integral of error|
  double deriv_filter_tau = 0.15;   // seconds; raw 20 Hz differences chatter
};

enum class ActuationMode { accelerate, brake, coast };

// Mode switch on the command/speed mismatch: small deficits stay on the
// accelerator (releasing it already slows the car), larger ones use the
// brake. Non-finite input falls back to coast.
ActuationMode select_mode(double v, double v_cmd);

struct ActuationState {
  ActuationMode mode = ActuationMode::accelerate;
  double integrator = 0.0;
  double prev_measurement = 0.0;
  double deriv_filter = 0.0;  // low-passed measurement derivative
  bool has_prev = false;
  double pedal = 0.0;
};

// One discrete PID update on the speed error. Derivative acts on the
// low-pass-filtered measurement, integration is conditional (frozen while
// the pedal is pinned and the error pushes further into saturation), and the
// whole state resets at standstill. In accelerate mode the pedal is clamped
// to [0, pedal_max], in brake mode to [pedal_min, 0].
double pid_step(ActuationState& state, double v, double v_cmd, const PidGains& gains,
                const PlantParams& plant, double dt);

// v' = v + dt * (gain*pedal - v) / time_constant, floored at zero.
double plant_step(double v, double pedal, const PlantParams& p, double dt);

// Tuned gain sets reproducing the target step responses (see tests).
PidGains default_accel_gains();  // h1
PidGains default_brake_gains();  // h2

// Full low-level lane: mode selection, per-mode PID, plant. Owns the shared
// actuation state; the integrator is re-seeded on mode switches so the pedal
// does not jump (bumpless transfer).
class Actuator {
 public:
  Actuator() : Actuator(default_accel_gains(), default_brake_gains(), PlantParams{}) {}
  Actuator(const PidGains& accel, const PidGains& brake, const PlantParams& plant);

  // Advance one tick; returns the realized acceleration (v' - v)/dt.
  double step(double v, double v_cmd, double dt);

  double pedal() const { return state_.pedal; }
  ActuationMode mode() const { return state_.mode; }
  void reset();

 private:
  PidGains accel_gains_;
  PidGains brake_gains_;
  PlantParams plant_;
  ActuationState state_;
};

// Rate-limited direct tracker used when the low-level lane is bypassed for
// controller-law isolation. The default limit matches the braking authority
// of the pedal-driven plant so safety behavior is comparable.
class IdealTracker {
 public:
  explicit IdealTracker(double rate_limit = 6.0) : rate_limit_(rate_limit) {}
  double step(double v, double v_cmd, double dt) const;

 private:
  double rate_limit_;  // m/s^2
};

struct StepResponse {
  double rise_time_10_90;  // seconds
  double overshoot_pct;    // percent of the step magnitude
  double settling_2pct;    // seconds, band is 2% of the step magnitude
};

// Standard step metrics over a velocity trace sampled at dt. The trace must
// begin at the step instant with initial value v_start and reference
// v_start + step. Throws if the trace never crosses 90% of the step.
StepResponse step_response_metrics(std::span<const double> trace, double dt, double v_start,
                                   double step);

}  // namespace ringsim
