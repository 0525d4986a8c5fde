#pragma once

#include <cstddef>
#include <deque>
#include <optional>

namespace ringsim {

// ---------------------------------------------------------------------------
// FollowerStopper: command the desired velocity U whenever safe, a reduced
// velocity when the gap closes, and zero inside the stopping region. Region
// boundaries are parabolas in the (gap, gap-rate) phase plane corresponding
// to constant decelerations d1 > d2 > d3.
// ---------------------------------------------------------------------------

struct FollowerStopperConfig {
  double dx0[3] = {4.5, 5.25, 6.0};  // boundary intercepts, meters
  double decel[3] = {1.5, 1.0, 0.5};  // boundary decelerations, m/s^2
};

// What the velocity controllers see each tick. gap_rate is d/dt of the
// smoothed gap; the lead velocity estimate is ego_velocity + gap_rate.
struct ControllerInput {
  double ego_velocity = 0.0;                  // m/s
  double gap = 0.0;                           // meters, smoothed
  double gap_rate = 0.0;                      // m/s, smoothed
  std::optional<double> desired_velocity;     // U, externally supplied
};

struct RegionBoundaries {
  double dx1, dx2, dx3;  // meters, strictly increasing
};

// Boundary positions for a given gap rate. Only the closing arm matters:
// positive gap rates are treated as zero.
RegionBoundaries fs_boundaries(double gap_rate, const FollowerStopperConfig& cfg);

// Commanded velocity in [0, U]. Continuous in the gap across all three
// region boundaries. Throws if no desired velocity is supplied.
double follower_stopper(const ControllerInput& in, const FollowerStopperConfig& cfg);

// ---------------------------------------------------------------------------
// PI with saturation: self-estimates the desired velocity as the temporal
// average of the ego velocity over a window, then blends target and lead
// velocity with gap-dependent weights. Needs no external input.
// ---------------------------------------------------------------------------

struct PiSatConfig {
  double window = 38.0;        // seconds of ego-velocity history
  double gap_low = 7.0;        // meters, g_l
  double gap_high = 30.0;      // meters, g_u
  double v_catch = 1.0;        // m/s allowed above the average to close gaps
  double gamma = 2.0;          // meters, alpha transition width
  double safety_time = 2.0;    // seconds (2-second rule)
  double safety_floor = 4.0;   // meters
  // The published rule computes the safety distance from the gap rate.
  // Enabling this substitutes the ego speed (the usual reading of the
  // 2-second rule) for sensitivity studies.
  bool safety_from_ego_speed = false;
};

// Ego-velocity history plus the previous command. The history is fed every
// tick, also while the controller is inactive, so the average is meaningful
// at activation time.
class PiSatState {
 public:
  PiSatState(double window_seconds, double dt);

  void observe(double ego_velocity);
  bool has_history() const { return !history_.empty(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return history_.size(); }

  void set_prev_command(double v) { prev_cmd_ = v; }
  double prev_command() const { return prev_cmd_; }

  friend double pi_desired_velocity(const PiSatState& state);

 private:
  std::size_t capacity_;
  std::deque<double> history_;
  double prev_cmd_ = 0.0;
};

// Temporal average of the buffered ego velocities. Throws on empty history.
double pi_desired_velocity(const PiSatState& state);

// U plus up to v_catch, ramped linearly between the gap limits.
double pi_target_velocity(double desired_velocity, double gap, const PiSatConfig& cfg);

struct BlendWeights {
  double alpha;  // in [0, 1]
  double beta;   // 1 - alpha/2, in [0.5, 1]
};

// Gap-dependent blend weights. alpha = 0 at or below the safety distance
// (follow the lead), alpha = 1 once the gap clears it by gamma.
BlendWeights pi_alpha_beta(double gap, double gap_rate, const PiSatConfig& cfg,
                           double ego_velocity = 0.0);

// v_cmd = beta*(alpha*v_target + (1-alpha)*v_lead) + (1-beta)*prev_cmd,
// clamped below at zero. Updates state.prev_command.
double pi_command_update(PiSatState& state, double v_target, double v_lead,
                         const BlendWeights& w);

// ---------------------------------------------------------------------------
// Human-executed variant: FollowerStopper behavior with the desired velocity
// read off a quantized speedometer and extra reaction lag on the inputs.
// ---------------------------------------------------------------------------

struct HumanAvgConfig {
  double quantum = 0.447;      // m/s, 1 mph speedometer readout
  double update_period = 38.0; // seconds, roughly one lap
  double reaction_lag = 2.0;   // seconds
};

double quantize_speed(double v, double quantum);

// FollowerStopper with U = quantize(lap_avg). Input lag is applied by the
// caller (the simulation loop owns the delay buffer).
double human_avg_controller(const ControllerInput& in, const HumanAvgConfig& cfg,
                            const FollowerStopperConfig& regions, double lap_avg);

// ---------------------------------------------------------------------------
// Gap signal conditioning: first-order smoothing of the raw gap and of its
// backward difference.
// ---------------------------------------------------------------------------

class GapFilter {
 public:
  // The rate stage runs at half the gap time constant so the cascade still
  // tracks a ramp to within 2% after five gap time constants.
  GapFilter(double time_constant, double dt);

  struct Output {
    double gap;       // smoothed gap, meters
    double gap_rate;  // smoothed d/dt gap, m/s
  };

  Output update(double raw_gap);
  void reset();

 private:
  double alpha_gap_;   // discrete pole, 1 - exp(-dt/tau)
  double alpha_rate_;  // 1 - exp(-2*dt/tau)
  double dt_;
  double smoothed_gap_ = 0.0;
  double smoothed_rate_ = 0.0;
  bool primed_ = false;
};

}  // namespace ringsim
