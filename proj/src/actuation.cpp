#include "ringsim/actuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ringsim {

ActuationMode select_mode(double v, double v_cmd) {
  if (!std::isfinite(v) || !std::isfinite(v_cmd)) return ActuationMode::coast;
  return (v_cmd - v > -0.25) ? ActuationMode::accelerate : ActuationMode::brake;
}

double pid_step(ActuationState& state, double v, double v_cmd, const PidGains& gains,
                const PlantParams& plant, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("pid_step: dt must be positive");
  if (v <= 0.0) {
    // Reset at standstill.
    state.integrator = 0.0;
    state.prev_measurement = v;
    state.deriv_filter = 0.0;
    state.has_prev = true;
  }
  const double error = v_cmd - v;
  const double raw_deriv = state.has_prev ? (v - state.prev_measurement) / dt : 0.0;
  const double alpha =
      gains.deriv_filter_tau > 0.0 ? 1.0 - std::exp(-dt / gains.deriv_filter_tau) : 1.0;
  state.deriv_filter += alpha * (raw_deriv - state.deriv_filter);
  const double deriv = state.deriv_filter;
  state.prev_measurement = v;
  state.has_prev = true;

  const double lo = (state.mode == ActuationMode::brake) ? plant.pedal_min : 0.0;
  const double hi = (state.mode == ActuationMode::brake) ? 0.0 : plant.pedal_max;

  double candidate = state.integrator + error * dt;
  candidate = std::clamp(candidate, -gains.integrator_limit, gains.integrator_limit);
  const double raw = gains.kp * error + gains.ki * candidate - gains.kd * deriv;
  if (raw > hi) {
    // Saturated high: only accept integration that pulls back down.
    if (candidate < state.integrator) state.integrator = candidate;
    state.pedal = hi;
  } else if (raw < lo) {
    if (candidate > state.integrator) state.integrator = candidate;
    state.pedal = lo;
  } else {
    state.integrator = candidate;
    state.pedal = raw;
  }
  return state.pedal;
}

double plant_step(double v, double pedal, const PlantParams& p, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("plant_step: dt must be positive");
  const double u = std::clamp(pedal, p.pedal_min, p.pedal_max);
  const double v_next = v + dt * (p.gain * u - v) / p.time_constant;
  return std::max(0.0, v_next);
}

PidGains default_accel_gains() {
  return {.kp = 30.0, .ki = 8.0, .kd = 8.0, .integrator_limit = 200.0, .deriv_filter_tau = 0.15};
}
PidGains default_brake_gains() {
  return {.kp = 16.0, .ki = 92.0, .kd = 0.0, .integrator_limit = 200.0, .deriv_filter_tau = 0.15};
}

Actuator::Actuator(const PidGains& accel, const PidGains& brake, const PlantParams& plant)
    : accel_gains_(accel), brake_gains_(brake), plant_(plant) {}

double Actuator::step(double v, double v_cmd, double dt) {
  const ActuationMode mode = select_mode(v, v_cmd);
  if (mode == ActuationMode::coast) {
    state_.mode = mode;
    state_.pedal = 0.0;
  } else {
    const PidGains& gains = (mode == ActuationMode::brake) ? brake_gains_ : accel_gains_;
    if (mode != state_.mode) {
      // Re-seed the integrator so the incoming mode starts at the pedal that
      // holds the current speed (0 for the brake). Without this the speed
      // sags for seconds after a brake release while the integral rebuilds.
      const double hold =
          std::clamp(v / plant_.gain, mode == ActuationMode::brake ? plant_.pedal_min : 0.0,
                     mode == ActuationMode::brake ? 0.0 : plant_.pedal_max);
      const double error = v_cmd - v;
      if (gains.ki > 0.0) {
        state_.integrator =
            std::clamp((hold - gains.kp * error + gains.kd * state_.deriv_filter) / gains.ki,
                       -gains.integrator_limit, gains.integrator_limit);
      } else {
        state_.integrator = 0.0;
      }
      state_.mode = mode;
    }
    pid_step(state_, v, v_cmd, gains, plant_, dt);
  }
  const double v_next = plant_step(v, state_.pedal, plant_, dt);
  return (v_next - v) / dt;
}

void Actuator::reset() { state_ = ActuationState{}; }

double IdealTracker::step(double v, double v_cmd, double dt) const {
  const double wanted = (v_cmd - v) / dt;
  return std::clamp(wanted, -rate_limit_, rate_limit_);
}

StepResponse step_response_metrics(std::span<const double> trace, double dt, double v_start,
                                   double step) {
  if (trace.size() < 2) throw std::invalid_argument("step_response_metrics: trace too short");
  if (step == 0.0) throw std::invalid_argument("step_response_metrics: zero step");
  const double target = v_start + step;
  const double sign = (step > 0.0) ? 1.0 : -1.0;

  // Progress toward the target as a fraction of the step magnitude.
  auto progress = [&](double v) { return sign * (v - v_start) / std::abs(step); };

  double t10 = -1.0, t90 = -1.0;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const double p = progress(trace[k]);
    const double t = static_cast<double>(k) * dt;
    if (t10 < 0.0 && p >= 0.1) t10 = t;
    if (t90 < 0.0 && p >= 0.9) {
      t90 = t;
      break;
    }
  }
  if (t90 < 0.0) throw std::invalid_argument("step_response_metrics: trace never reaches 90%");

  double peak = 0.0;
  for (double v : trace) peak = std::max(peak, sign * (v - target));
  const double overshoot_pct = 100.0 * std::max(0.0, peak) / std::abs(step);

  const double band = 0.02 * std::abs(step);
  double settle = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < trace.size(); ++k) {
    bool stays = true;
    for (std::size_t j = k; j < trace.size(); ++j) {
      if (std::abs(trace[j] - target) > band) {
        stays = false;
        break;
      }
    }
    if (stays) {
      settle = static_cast<double>(k) * dt;
      break;
    }
  }
  return {t90 - t10, overshoot_pct, settle};
}

}  // namespace ringsim
