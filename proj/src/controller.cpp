#include "ringsim/controller.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ringsim {

RegionBoundaries fs_boundaries(double gap_rate, const FollowerStopperConfig& cfg) {
  const double dv_neg = std::min(gap_rate, 0.0);
  const double q = dv_neg * dv_neg;
  return {cfg.dx0[0] + q / (2.0 * cfg.decel[0]),
          cfg.dx0[1] + q / (2.0 * cfg.decel[1]),
          cfg.dx0[2] + q / (2.0 * cfg.decel[2])};
}

double follower_stopper(const ControllerInput& in, const FollowerStopperConfig& cfg) {
  if (!in.desired_velocity.has_value()) {
    throw std::invalid_argument("follower_stopper: desired velocity not supplied");
  }
  const double U = *in.desired_velocity;
  const auto [dx1, dx2, dx3] = fs_boundaries(in.gap_rate, cfg);
  const double v_lead = in.ego_velocity + in.gap_rate;
  const double v = std::min(std::max(v_lead, 0.0), U);
  const double dx = in.gap;

  if (dx <= dx1) return 0.0;
  if (dx <= dx2) return v * (dx - dx1) / (dx2 - dx1);
  if (dx <= dx3) return v + (U - v) * (dx - dx2) / (dx3 - dx2);
  return U;
}

PiSatState::PiSatState(double window_seconds, double dt)
    : capacity_(static_cast<std::size_t>(
          std::max<long long>(1, std::llround(window_seconds / dt)))) {}

void PiSatState::observe(double ego_velocity) {
  history_.push_back(ego_velocity);
  if (history_.size() > capacity_) history_.pop_front();
}

double pi_desired_velocity(const PiSatState& state) {
  if (state.history_.empty()) {
    throw std::invalid_argument("pi_desired_velocity: empty velocity history");
  }
  const double sum = std::accumulate(state.history_.begin(), state.history_.end(), 0.0);
  return sum / static_cast<double>(state.history_.size());
}

double pi_target_velocity(double desired_velocity, double gap, const PiSatConfig& cfg) {
  const double ramp = std::clamp((gap - cfg.gap_low) / (cfg.gap_high - cfg.gap_low), 0.0, 1.0);
  return desired_velocity + cfg.v_catch * ramp;
}

BlendWeights pi_alpha_beta(double gap, double gap_rate, const PiSatConfig& cfg,
                           double ego_velocity) {
  const double basis = cfg.safety_from_ego_speed ? ego_velocity : gap_rate;
  const double safety_distance = std::max(cfg.safety_time * basis, cfg.safety_floor);
  const double alpha = std::clamp((gap - safety_distance) / cfg.gamma, 0.0, 1.0);
  return {alpha, 1.0 - 0.5 * alpha};
}

double pi_command_update(PiSatState& state, double v_target, double v_lead,
                         const BlendWeights& w) {
  const double blended = w.beta * (w.alpha * v_target + (1.0 - w.alpha) * v_lead) +
                         (1.0 - w.beta) * state.prev_command();
  const double cmd = std::max(0.0, blended);
  state.set_prev_command(cmd);
  return cmd;
}

double quantize_speed(double v, double quantum) {
  if (!(quantum > 0.0)) throw std::invalid_argument("quantize_speed: quantum must be positive");
  return std::round(v / quantum) * quantum;
}

double human_avg_controller(const ControllerInput& in, const HumanAvgConfig& cfg,
                            const FollowerStopperConfig& regions, double lap_avg) {
  ControllerInput lagged = in;
  lagged.desired_velocity = quantize_speed(lap_avg, cfg.quantum);
  return follower_stopper(lagged, regions);
}

GapFilter::GapFilter(double time_constant, double dt)
    : alpha_gap_(time_constant > 0.0 ? 1.0 - std::exp(-dt / time_constant) : 1.0),
      alpha_rate_(time_constant > 0.0 ? 1.0 - std::exp(-2.0 * dt / time_constant) : 1.0),
      dt_(dt) {}

GapFilter::Output GapFilter::update(double raw_gap) {
  if (!primed_) {
    smoothed_gap_ = raw_gap;
    smoothed_rate_ = 0.0;
    primed_ = true;
    return {smoothed_gap_, smoothed_rate_};
  }
  const double prev = smoothed_gap_;
  smoothed_gap_ += alpha_gap_ * (raw_gap - smoothed_gap_);
  const double rate = (smoothed_gap_ - prev) / dt_;
  smoothed_rate_ += alpha_rate_ * (rate - smoothed_rate_);
  return {smoothed_gap_, smoothed_rate_};
}

void GapFilter::reset() {
  primed_ = false;
  smoothed_gap_ = 0.0;
  smoothed_rate_ = 0.0;
}

}  // namespace ringsim
