#include "ringsim/driver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ringsim {

double optimal_velocity(double gap, const OvmParams& p) {
  if (gap < 0.0) gap = 0.0;
  const double u = gap / p.length_scale - p.form_offset;
  const double raw =
      p.v_max * (std::tanh(u) + std::tanh(p.form_scale)) / (1.0 + std::tanh(p.form_scale));
  return std::clamp(raw, 0.0, p.v_max);
}

double optimal_velocity_gradient(double gap, const OvmParams& p) {
  if (gap < 0.0) gap = 0.0;
  const double u = gap / p.length_scale - p.form_offset;
  const double raw =
      p.v_max * (std::tanh(u) + std::tanh(p.form_scale)) / (1.0 + std::tanh(p.form_scale));
  if (raw <= 0.0 || raw >= p.v_max) return 0.0;  // clamped region is flat
  const double sech2 = 1.0 - std::tanh(u) * std::tanh(u);
  return p.v_max * sech2 / (p.length_scale * (1.0 + std::tanh(p.form_scale)));
}

double ovm_acceleration(double gap, double v, const OvmParams& p) {
  const double desired = optimal_velocity(gap, p);
  return std::clamp(p.sensitivity * (desired - v), -p.max_decel, p.max_accel);
}

double string_stability_margin(const OvmParams& p, double equilibrium_gap) {
  if (!(equilibrium_gap > 0.0)) {
    throw std::invalid_argument("string_stability_margin: equilibrium gap must be positive");
  }
  // |F(iw)| <= 1 for the linearized chain iff V' <= k/2 + lambda.
  return optimal_velocity_gradient(equilibrium_gap, p) - 0.5 * p.sensitivity -
         p.rate_sensitivity;
}

OvmDriver::OvmDriver(const OvmParams& params, std::uint64_t noise_seed, double dt)
    : params_(params),
      delay_ticks_(static_cast<std::size_t>(std::llround(std::max(0.0, params.reaction_delay) / dt))),
      dt_(dt),
      rng_(noise_seed) {}

double OvmDriver::step(double gap, double velocity) {
  gap_history_.push_back(gap);
  // The gap is perceived with the reaction delay; the driver's own speed is
  // known instantly. Before the buffer fills, the oldest sample stands in.
  // One extra slot keeps the previous delayed sample for the closing rate.
  if (gap_history_.size() > delay_ticks_ + 2) gap_history_.pop_front();
  const double delayed_gap =
      gap_history_.size() > delay_ticks_ + 1 ? gap_history_[1] : gap_history_.front();
  const double prev_gap = gap_history_.front();
  const double gap_rate =
      gap_history_.size() > delay_ticks_ + 1 ? (delayed_gap - prev_gap) / dt_ : 0.0;

  const double desired = optimal_velocity(delayed_gap, params_);
  double a = params_.sensitivity * (desired - velocity) + params_.rate_sensitivity * gap_rate;
  a = std::clamp(a, -params_.max_decel, params_.max_accel);
  if (params_.noise_std > 0.0) a += rng_.normal(0.0, params_.noise_std);
  return a;
}

void OvmDriver::reset() { gap_history_.clear(); }

}  // namespace ringsim
