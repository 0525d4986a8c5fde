#include "ringsim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <optional>
#include <stdexcept>
#include <thread>

#include "ringsim/fleet.hpp"
#include "ringsim/random.hpp"

namespace ringsim {

namespace {

std::string format_speed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

Scenario base_template(int n_vehicles) {
  Scenario s;
  s.track = RingTrack{};
  s.fleet = reference_fleet(n_vehicles);
  s.driver = OvmParams{};
  s.av_index = 0;
  s.dt = 0.05;
  s.seed = 1;
  return s;
}

}  // namespace

std::vector<std::string> validate_scenario(const Scenario& s) {
  std::vector<std::string> warnings;
  if (s.fleet.size() < 2) warnings.push_back("fleet has fewer than two vehicles");
  if (s.av_index < 0 || s.av_index >= static_cast<int>(s.fleet.size())) {
    warnings.push_back("av_index out of range");
  }
  if (!(s.duration > 0.0)) warnings.push_back("duration must be positive");
  if (!(s.dt > 0.0)) warnings.push_back("dt must be positive");
  if (!std::is_sorted(s.events.begin(), s.events.end(),
                      [](const auto& a, const auto& b) { return a.time < b.time; })) {
    warnings.push_back("events are not sorted by time");
  }
  std::optional<double> first_activation;
  for (const auto& e : s.events) {
    if (e.time < 0.0 || e.time > s.duration) warnings.push_back("event outside [0, duration]");
    if (e.kind == ScenarioEvent::Kind::activate_controller && !first_activation) {
      first_activation = e.time;
    }
  }
  bool has_set_u_at_activation = false;
  for (const auto& e : s.events) {
    if (e.kind == ScenarioEvent::Kind::set_desired_velocity && first_activation &&
        e.time <= *first_activation) {
      has_set_u_at_activation = true;
    }
  }
  if (first_activation) {
    if (*first_activation < 45.0) {
      warnings.push_back("controller activates before 45 s; unsteady traffic needs time to develop");
    }
    if (s.controller == ControllerKind::follower_stopper && !has_set_u_at_activation) {
      warnings.push_back("follower_stopper has no desired-velocity setpoint at activation");
    }
    if (s.controller == ControllerKind::none) {
      warnings.push_back("activation event scheduled but controller kind is none");
    }
  }
  return warnings;
}

TrajectoryDataset run_scenario(const Scenario& s) {
  const std::size_t n = s.fleet.size();
  if (n < 2) throw std::invalid_argument("run_scenario: need at least two vehicles");
  if (s.av_index < 0 || s.av_index >= static_cast<int>(n)) {
    throw std::invalid_argument("run_scenario: av_index out of range");
  }
  if (!(s.dt > 0.0) || !(s.duration > 0.0)) {
    throw std::invalid_argument("run_scenario: dt and duration must be positive");
  }
  const double L = s.track.circumference;
  const double dt = s.dt;
  const std::size_t av = static_cast<std::size_t>(s.av_index);
  const long long steps = std::llround(s.duration / dt);
  const std::size_t samples = static_cast<std::size_t>(steps) + 1;

  WorldState world = uniform_initialization(s.track, s.fleet);
  if (s.start_at_equilibrium) {
    for (std::size_t i = 0; i < n; ++i) {
      world.vehicles[i].velocity = optimal_velocity(gap(world, s.fleet, i, L), s.driver);
    }
  }

  std::vector<OvmDriver> drivers;
  drivers.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    drivers.emplace_back(s.driver, derive_stream(s.seed, i), dt);
  }
  Rng sensor_rng(derive_stream(s.seed, 0x5e << 8));

  GapFilter gap_filter(s.gap_filter_time_constant, dt);
  PiSatState pi_state(s.pi_saturation.window, dt);
  Actuator actuator(s.accel_gains, s.brake_gains, s.plant);
  IdealTracker tracker(s.ideal_rate_limit);

  // Input lag buffer for the human-executed controller.
  const std::size_t lag_ticks = static_cast<std::size_t>(
      std::llround(std::max(0.0, s.human_avg.reaction_lag) / dt));
  std::deque<ControllerInput> lag_buffer;

  TrajectoryDataset data;
  data.dt = dt;
  data.av_index = s.av_index;
  data.vehicles.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    data.vehicles[i].id = s.fleet[i].id;
    data.vehicles[i].position.reserve(samples);
    data.vehicles[i].velocity.reserve(samples);
    data.vehicles[i].acceleration.reserve(samples);
    data.vehicles[i].fuel_rate.reserve(samples);
  }
  data.av_command.reserve(samples);

  std::vector<double> unwrapped(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) unwrapped[i] = world.vehicles[i].position;

  bool active = false;
  std::optional<double> desired_velocity;  // U from setpoint events
  const double initial_av_pos = unwrapped[av];
  double lap_avg = 0.0;
  bool lap_avg_set = false;
  double lap_start_time = 0.0;
  double lap_start_pos = unwrapped[av];

  std::size_t next_event = 0;
  std::vector<double> accels(n, 0.0);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (long long j = 0; j <= steps; ++j) {
    const double t = static_cast<double>(j) * dt;

    // Apply due events.
    while (next_event < s.events.size() && s.events[next_event].time <= t + 1e-9) {
      const ScenarioEvent& e = s.events[next_event];
      switch (e.kind) {
        case ScenarioEvent::Kind::activate_controller:
          if (active) {
            data.events.push_back({t, "warning: activate while already active (ignored)"});
          } else {
            active = true;
            pi_state.set_prev_command(world.vehicles[av].velocity);
            actuator.reset();
            if (!lap_avg_set) {
              // No lap completed yet: fall back to the average speed so far.
              lap_avg = t > 0.0 ? (unwrapped[av] - initial_av_pos) / t : 0.0;
              lap_avg_set = true;
            }
            data.events.push_back({t, "activate_controller"});
          }
          break;
        case ScenarioEvent::Kind::deactivate_controller:
          if (!active) {
            data.events.push_back({t, "warning: deactivate while inactive (ignored)"});
          } else {
            active = false;
            data.events.push_back({t, "deactivate_controller"});
          }
          break;
        case ScenarioEvent::Kind::set_desired_velocity:
          if (desired_velocity && *desired_velocity == e.value) {
            data.events.push_back({t, "warning: duplicate setpoint " + format_speed(e.value) + " (ignored)"});
          } else {
            desired_velocity = e.value;
            data.events.push_back({t, "set_desired_velocity " + format_speed(e.value)});
          }
          break;
        case ScenarioEvent::Kind::mark_interval:
          data.events.push_back({t, "mark_interval " + e.label});
          break;
      }
      ++next_event;
    }

    // Sense. The controlled vehicle's gap pipeline runs every tick so the
    // filter and the velocity history are warm at activation.
    double raw_gap = gap(world, s.fleet, av, L);
    if (s.sensor_noise_std > 0.0) raw_gap += sensor_rng.normal(0.0, s.sensor_noise_std);
    const GapFilter::Output smoothed = gap_filter.update(std::max(0.0, raw_gap));
    const double v_av = world.vehicles[av].velocity;
    pi_state.observe(v_av);

    // Lap bookkeeping for the human-executed controller.
    if (unwrapped[av] - lap_start_pos >= L) {
      if (t > lap_start_time) {
        lap_avg = (unwrapped[av] - lap_start_pos) / (t - lap_start_time);
        lap_avg_set = true;
      }
      lap_start_pos = unwrapped[av];
      lap_start_time = t;
    }

    ControllerInput input;
    input.ego_velocity = v_av;
    input.gap = smoothed.gap;
    input.gap_rate = smoothed.gap_rate;
    input.desired_velocity = desired_velocity;
    lag_buffer.push_back(input);
    if (lag_buffer.size() > lag_ticks + 1) lag_buffer.pop_front();

    // Human car-following accelerations (the AV included, to keep its noise
    // stream warm across control windows).
    for (std::size_t i = 0; i < n; ++i) {
      accels[i] = drivers[i].step(gap(world, s.fleet, i, L), world.vehicles[i].velocity);
    }

    double v_cmd = nan;
    if (active) {
      switch (s.controller) {
        case ControllerKind::none:
          break;
        case ControllerKind::follower_stopper:
          v_cmd = follower_stopper(input, s.follower_stopper);
          break;
        case ControllerKind::pi_saturation: {
          const double desired = pi_desired_velocity(pi_state);
          const double target = pi_target_velocity(desired, input.gap, s.pi_saturation);
          const BlendWeights w =
              pi_alpha_beta(input.gap, input.gap_rate, s.pi_saturation, input.ego_velocity);
          const double v_lead = input.ego_velocity + input.gap_rate;
          v_cmd = pi_command_update(pi_state, target, v_lead, w);
          break;
        }
        case ControllerKind::human_avg: {
          const ControllerInput& lagged = lag_buffer.front();
          const double basis = desired_velocity ? *desired_velocity : lap_avg;
          v_cmd = human_avg_controller(lagged, s.human_avg, s.follower_stopper, basis);
          break;
        }
      }
      if (!std::isnan(v_cmd)) {
        accels[av] = s.ideal_actuation ? tracker.step(v_av, v_cmd, dt)
                                       : actuator.step(v_av, v_cmd, dt);
      }
    }

    // Record this tick.
    for (std::size_t i = 0; i < n; ++i) {
      auto& veh = data.vehicles[i];
      veh.position.push_back(unwrapped[i]);
      veh.velocity.push_back(world.vehicles[i].velocity);
      veh.acceleration.push_back(accels[i]);
      veh.fuel_rate.push_back(fuel_rate(world.vehicles[i].velocity, accels[i], s.fleet[i].fuel));
    }
    data.av_command.push_back(v_cmd);

    if (j == steps) break;

    WorldState next = step_world(world, accels, dt, L);
    for (std::size_t i = 0; i < n; ++i) unwrapped[i] += next.vehicles[i].velocity * dt;

    if (auto hit = first_overlap(next, s.fleet, L)) {
      const double g = gap(next, s.fleet, *hit, L);
      char buf[128];
      std::snprintf(buf, sizeof(buf), "collision: vehicle %d overlaps its lead by %.3f m at t=%.2f s",
                    s.fleet[*hit].id, -g, next.time);
      if (s.strict_collisions) {
        data.aborted = true;
        data.abort_reason = buf;
        data.events.push_back({next.time, buf});
        break;
      }
      // Permissive mode: place the follower touching its lead and move on.
      const std::size_t lead = (*hit + 1) % n;
      const double target =
          wrap_position(next.vehicles[lead].position - s.fleet[lead].length, L);
      unwrapped[*hit] += g;  // g < 0, pull the odometer back by the overlap
      next.vehicles[*hit].position = target;
      data.events.push_back({next.time, std::string(buf) + " (clamped)"});
    }
    world = std::move(next);
  }
  return data;
}

Scenario experiment_a_template() {
  Scenario s = base_template(21);
  s.name = "experiment-a";
  s.controller = ControllerKind::follower_stopper;
  s.duration = 567.0;
  using K = ScenarioEvent::Kind;
  s.events = {
      {126.0, K::activate_controller, 0.0, ""},
      {126.0, K::set_desired_velocity, 6.5, ""},
      {222.0, K::set_desired_velocity, 7.0, ""},
      {292.0, K::set_desired_velocity, 7.5, ""},
      {347.0, K::set_desired_velocity, 8.0, ""},
      {415.0, K::set_desired_velocity, 7.5, ""},
      {463.0, K::deactivate_controller, 0.0, ""},
  };
  return s;
}

Scenario experiment_b_template() {
  Scenario s = base_template(21);
  s.name = "experiment-b";
  s.controller = ControllerKind::human_avg;
  s.duration = 409.0;
  using K = ScenarioEvent::Kind;
  s.events = {
      {112.0, K::activate_controller, 0.0, ""},
      {112.0, K::set_desired_velocity, 6.26, ""},
      {202.0, K::set_desired_velocity, 7.15, ""},
      {300.0, K::deactivate_controller, 0.0, ""},
  };
  return s;
}

Scenario experiment_c_template() {
  Scenario s = base_template(22);
  s.name = "experiment-c";
  s.controller = ControllerKind::pi_saturation;
  s.duration = 413.0;
  s.events = {{218.0, ScenarioEvent::Kind::activate_controller, 0.0, ""}};
  return s;
}

namespace {

struct Boundary {
  double time;
  std::string label;
  bool controlled;
};

std::vector<Interval> boundaries_to_intervals(std::vector<Boundary> bounds, double duration) {
  std::sort(bounds.begin(), bounds.end(),
            [](const Boundary& a, const Boundary& b) { return a.time < b.time; });
  std::vector<Interval> out;
  for (std::size_t k = 0; k < bounds.size(); ++k) {
    const double end = (k + 1 < bounds.size()) ? bounds[k + 1].time : duration;
    if (end - bounds[k].time < 1e-9) continue;  // degenerate segment
    out.push_back({bounds[k].label, bounds[k].time, end, bounds[k].controlled});
  }
  return out;
}

}  // namespace

std::vector<Interval> segment_intervals(const TrajectoryDataset& data, const Scenario& s,
                                        double wave_threshold) {
  std::vector<Boundary> bounds;
  bounds.push_back({0.0, "start", false});

  bool active = false;
  std::optional<double> setpoint;
  std::optional<double> first_activation;
  // Group events by time so activate + setpoint at the same instant produce
  // a single boundary.
  std::size_t k = 0;
  while (k < s.events.size()) {
    const double t = s.events[k].time;
    const bool was_active = active;
    const auto old_setpoint = setpoint;
    std::optional<std::string> mark;
    while (k < s.events.size() && s.events[k].time == t) {
      const auto& e = s.events[k];
      if (e.kind == ScenarioEvent::Kind::activate_controller) active = true;
      if (e.kind == ScenarioEvent::Kind::deactivate_controller) active = false;
      if (e.kind == ScenarioEvent::Kind::set_desired_velocity) setpoint = e.value;
      if (e.kind == ScenarioEvent::Kind::mark_interval) mark = e.label;
      ++k;
    }
    if (active && !first_activation) first_activation = t;
    if (mark) {
      bounds.push_back({t, *mark, active});
    } else if (active != was_active || (active && setpoint != old_setpoint)) {
      std::string label;
      if (!active) {
        label = "disable";
      } else if (setpoint) {
        label = "control " + format_speed(*setpoint);
      } else {
        label = "control";
      }
      bounds.push_back({t, label, active});
    }
  }

  if (auto onset = wave_onset_time(data, wave_threshold)) {
    const bool before_control = !first_activation || *onset < *first_activation;
    if (before_control && *onset > 1e-9) bounds.push_back({*onset, "waves", false});
  }
  const double duration = std::min(s.duration, data.duration());
  return boundaries_to_intervals(std::move(bounds), duration);
}

std::vector<Interval> auto_intervals(const TrajectoryDataset& data, double wave_threshold) {
  std::vector<Boundary> bounds;
  bounds.push_back({0.0, "start", false});

  std::optional<double> control_start;
  bool active = false;
  for (std::size_t j = 0; j < data.av_command.size(); ++j) {
    const bool now = !std::isnan(data.av_command[j]);
    if (now && !active) {
      if (!control_start) control_start = data.time_at(j);
      bounds.push_back({data.time_at(j), "control", true});
    } else if (!now && active) {
      bounds.push_back({data.time_at(j), "disable", false});
    }
    active = now;
  }
  if (auto onset = wave_onset_time(data, wave_threshold)) {
    if ((!control_start || *onset < *control_start) && *onset > 1e-9) {
      bounds.push_back({*onset, "waves", false});
    }
  }
  return boundaries_to_intervals(std::move(bounds), data.duration());
}

std::vector<SweepResult> seed_sweep(const Scenario& s, std::span<const std::uint64_t> seeds,
                                    int jobs) {
  std::vector<SweepResult> results(seeds.size());
  std::atomic<std::size_t> cursor{0};
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(seeds.size())));

  auto work = [&]() {
    for (;;) {
      const std::size_t idx = cursor.fetch_add(1);
      if (idx >= seeds.size()) return;
      SweepResult& r = results[idx];
      r.seed = seeds[idx];
      try {
        Scenario run = s;
        run.seed = seeds[idx];
        const TrajectoryDataset data = run_scenario(run);
        r.aborted = data.aborted;
        r.abort_reason = data.abort_reason;
        const auto intervals = segment_intervals(data, run);
        r.report = build_report(data, intervals, static_cast<int>(run.fleet.size()),
                                run.track.circumference);
      } catch (const std::exception& ex) {
        r.aborted = true;
        r.abort_reason = ex.what();
      }
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return results;
}

}  // namespace ringsim
