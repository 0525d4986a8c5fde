#include <stdexcept>
#include <cmath>

#include "doctest.h"
#include "ringsim/actuation.hpp"
#include "ringsim/controller.hpp"
#include "ringsim/random.hpp"

using namespace ringsim;

TEST_CASE("region boundaries") {
  FollowerStopperConfig cfg;
  SUBCASE("worked closing-speed case") {
    const auto b = fs_boundaries(-3.0, cfg);
    CHECK(b.dx1 == doctest::Approx(7.5).epsilon(1e-12));
    CHECK(b.dx2 == doctest::Approx(9.75).epsilon(1e-12));
    CHECK(b.dx3 == doctest::Approx(15.0).epsilon(1e-12));
  }
  SUBCASE("intercepts at zero and positive gap rate") {
    for (double dv : {0.0, 2.0}) {
      const auto b = fs_boundaries(dv, cfg);
      CHECK(b.dx1 == doctest::Approx(4.5));
      CHECK(b.dx2 == doctest::Approx(5.25));
      CHECK(b.dx3 == doctest::Approx(6.0));
    }
  }
  SUBCASE("ordering holds for any gap rate") {
    Rng rng(2);
    for (int k = 0; k < 1000; ++k) {
      const double dv = (rng.uniform01() - 0.7) * 12.0;
      const auto b = fs_boundaries(dv, cfg);
      CHECK(b.dx1 < b.dx2);
      CHECK(b.dx2 < b.dx3);
    }
  }
}

TEST_CASE("follower_stopper branch examples") {
  FollowerStopperConfig cfg;
  const auto cmd = [&](double gap, double ego, double rate, double U) {
    return follower_stopper({ego, gap, rate, U}, cfg);
  };
  CHECK(cmd(20.0, 7.5, 0.0, 7.5) == doctest::Approx(7.5));       // safe region
  CHECK(cmd(3.0, 5.0, 0.0, 7.5) == doctest::Approx(0.0));        // stopping region
  CHECK(cmd(3.0, 5.0, 1.5, 7.5) == doctest::Approx(0.0));
  // lead at 3.0 m/s: ego = 3.0 with zero rate
  CHECK(cmd(5.0, 3.0, 0.0, 7.5) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(cmd(5.5, 3.0, 0.0, 7.5) == doctest::Approx(4.5).epsilon(1e-12));
  CHECK_THROWS_AS(follower_stopper({5.0, 10.0, 0.0, std::nullopt}, cfg), std::invalid_argument);
}

TEST_CASE("follower_stopper is continuous at the region boundaries") {
  FollowerStopperConfig cfg;
  Rng rng(7);
  double worst_mismatch = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const double rate = -4.0 * rng.uniform01();
    const double ego = 8.0 * rng.uniform01();
    const double U = 4.0 + 4.0 * rng.uniform01();
    const auto b = fs_boundaries(rate, cfg);
    const double v = std::min(std::max(ego + rate, 0.0), U);
    // branch values evaluated exactly at each boundary
    const double left1 = 0.0;
    const double right1 = v * (b.dx1 - b.dx1) / (b.dx2 - b.dx1);
    const double left2 = v * (b.dx2 - b.dx1) / (b.dx2 - b.dx1);
    const double right2 = v + (U - v) * (b.dx2 - b.dx2) / (b.dx3 - b.dx2);
    const double left3 = v + (U - v) * (b.dx3 - b.dx2) / (b.dx3 - b.dx2);
    const double right3 = U;
    worst_mismatch = std::max({worst_mismatch, std::fabs(left1 - right1),
                               std::fabs(left2 - right2), std::fabs(left3 - right3)});
  }
  CHECK(worst_mismatch < 1e-9);
}

TEST_CASE("follower_stopper output range and monotonicity in the gap") {
  FollowerStopperConfig cfg;
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const double rate = (rng.uniform01() - 0.7) * 8.0;
    const double ego = 9.0 * rng.uniform01();
    const double U = 3.0 + 5.0 * rng.uniform01();
    double prev = -1.0;
    for (double gap = 0.0; gap <= 30.0; gap += 0.05) {
      const double out = follower_stopper({ego, gap, rate, U}, cfg);
      CHECK(out >= 0.0);
      CHECK(out <= U + 1e-12);
      CHECK(out >= prev - 1e-12);
      prev = out;
    }
  }
}

TEST_CASE("pi desired velocity averages the history") {
  PiSatState st(38.0, 0.05);
  CHECK(st.capacity() == 760);
  CHECK_THROWS_AS(pi_desired_velocity(st), std::invalid_argument);
  st.observe(7.0);
  st.observe(7.0);
  CHECK(pi_desired_velocity(st) == doctest::Approx(7.0));

  PiSatState st2(38.0, 0.05);
  st2.observe(6.0);
  st2.observe(8.0);
  CHECK(pi_desired_velocity(st2) == doctest::Approx(7.0));

  // Full 38 s window of a sinusoid around 7.2: the average recovers the
  // mean because the window spans whole periods.
  PiSatState st3(38.0, 0.05);
  for (int j = 0; j < 760; ++j) {
    const double t = j * 0.05;
    st3.observe(7.2 + 1.3 * std::sin(2.0 * M_PI * t / 19.0));
  }
  CHECK(pi_desired_velocity(st3) == doctest::Approx(7.2).epsilon(0.01 / 7.2));
}

TEST_CASE("pi target velocity ramp") {
  PiSatConfig cfg;
  CHECK(pi_target_velocity(7.0, 5.0, cfg) == doctest::Approx(7.0));
  CHECK(pi_target_velocity(7.0, 40.0, cfg) == doctest::Approx(8.0));
  CHECK(pi_target_velocity(7.0, 18.5, cfg) == doctest::Approx(7.5).epsilon(1e-12));
}

TEST_CASE("pi blend weights") {
  PiSatConfig cfg;
  const auto w4 = pi_alpha_beta(4.0, 0.0, cfg);
  CHECK(w4.alpha == doctest::Approx(0.0));
  CHECK(w4.beta == doctest::Approx(1.0));
  const auto w6 = pi_alpha_beta(6.0, 0.0, cfg);
  CHECK(w6.alpha == doctest::Approx(1.0));
  CHECK(w6.beta == doctest::Approx(0.5));
  const auto w5 = pi_alpha_beta(5.0, 0.0, cfg);
  CHECK(w5.alpha == doctest::Approx(0.5));
  CHECK(w5.beta == doctest::Approx(0.75));

  SUBCASE("alpha saturates around the safety distance") {
    Rng rng(4);
    for (int k = 0; k < 500; ++k) {
      const double rate = (rng.uniform01() - 0.5) * 10.0;
      const double gap = 30.0 * rng.uniform01();
      const double safety = std::max(cfg.safety_time * rate, cfg.safety_floor);
      const auto w = pi_alpha_beta(gap, rate, cfg);
      if (gap <= safety) CHECK(w.alpha == 0.0);
      if (gap >= safety + cfg.gamma) CHECK(w.alpha == 1.0);
      CHECK(w.beta == doctest::Approx(1.0 - 0.5 * w.alpha));
    }
  }
  SUBCASE("ego-speed variant uses the 2-second rule on own speed") {
    PiSatConfig ego_cfg;
    ego_cfg.safety_from_ego_speed = true;
    const auto w = pi_alpha_beta(10.0, 0.0, ego_cfg, 7.0);  // safety = 14 m
    CHECK(w.alpha == doctest::Approx(0.0));
  }
}

TEST_CASE("pi command update") {
  PiSatState st(38.0, 0.05);
  st.set_prev_command(7.0);
  CHECK(pi_command_update(st, 8.0, 6.0, {1.0, 1.0}) == doctest::Approx(8.0));
  st.set_prev_command(7.0);
  CHECK(pi_command_update(st, 8.0, 6.0, {0.0, 1.0}) == doctest::Approx(6.0));
  st.set_prev_command(7.0);
  CHECK(pi_command_update(st, 8.0, 6.0, {0.5, 0.75}) == doctest::Approx(7.0).epsilon(1e-12));
  CHECK(st.prev_command() == doctest::Approx(7.0));

  SUBCASE("output stays in the convex hull of its inputs") {
    Rng rng(6);
    for (int k = 0; k < 1000; ++k) {
      PiSatState s2(38.0, 0.05);
      const double prev = 10.0 * rng.uniform01();
      const double target = 10.0 * rng.uniform01();
      const double lead = 10.0 * rng.uniform01();
      s2.set_prev_command(prev);
      const double alpha = rng.uniform01();
      const double out = pi_command_update(s2, target, lead, {alpha, 1.0 - 0.5 * alpha});
      const double lo = std::min({prev, target, lead});
      const double hi = std::max({prev, target, lead});
      CHECK(out >= lo - 1e-12);
      CHECK(out <= hi + 1e-12);
    }
  }
}

TEST_CASE("human average controller quantizes the setpoint") {
  HumanAvgConfig cfg;
  FollowerStopperConfig regions;
  CHECK(quantize_speed(6.26, cfg.quantum) == doctest::Approx(14.0 * 0.447).epsilon(1e-12));
  CHECK(std::fabs(quantize_speed(6.26, cfg.quantum) - 6.26) < 0.005);

  ControllerInput far{6.0, 25.0, 0.0, std::nullopt};
  CHECK(human_avg_controller(far, cfg, regions, 6.26) == doctest::Approx(14.0 * 0.447));
  ControllerInput close{6.0, 3.0, 0.0, std::nullopt};
  CHECK(human_avg_controller(close, cfg, regions, 6.26) == doctest::Approx(0.0));
}

TEST_CASE("gap filter steady state, ramp tracking, and noise gain") {
  const double dt = 0.05, tc = 0.3;
  SUBCASE("constant input") {
    GapFilter f(tc, dt);
    GapFilter::Output out{};
    for (int k = 0; k < 400; ++k) out = f.update(10.0);
    CHECK(out.gap == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(out.gap_rate == doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("ramp rate converges within five time constants") {
    GapFilter f(tc, dt);
    GapFilter::Output out{};
    const int ticks = static_cast<int>(5.0 * tc / dt);
    for (int k = 0; k <= ticks; ++k) out = f.update(10.0 + 1.0 * k * dt);
    CHECK(out.gap_rate == doctest::Approx(1.0).epsilon(0.02));
  }
  SUBCASE("noise-induced rate stays inside the filter-gain envelope") {
    GapFilter f(tc, dt);
    Rng rng(12);
    double worst = 0.0;
    for (int k = 0; k < 20000; ++k) {
      const auto out = f.update(10.0 + rng.normal(0.0, 0.1));
      if (k > 100) worst = std::max(worst, std::fabs(out.gap_rate));
    }
    CHECK(worst < 3.0 * 0.1 / tc);
  }
  SUBCASE("single sample has zero rate") {
    GapFilter f(tc, dt);
    const auto out = f.update(12.0);
    CHECK(out.gap == doctest::Approx(12.0));
    CHECK(out.gap_rate == 0.0);
  }
}

TEST_CASE("follower_stopper closed loop survives random lead braking") {
  // Library-level version of the safety property: lead brakes at up to d1
  // from at most U down to zero; the follower must never touch it.
  const double dt = 0.05;
  FollowerStopperConfig fs;
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const double U = 4.0 + 4.0 * rng.uniform01();
    const double v0 = 0.5 + (U - 0.5) * rng.uniform01();
    double gap = 6.0 + 24.0 * rng.uniform01();
    const double brake_at = 5.0 * rng.uniform01();
    const double decel = 0.05 + 1.45 * rng.uniform01();
    double v_lead = v0, v_av = v0;
    GapFilter filter(0.3, dt);
    Actuator act;
    for (int k = 0; k < static_cast<int>(60.0 / dt); ++k) {
      if (k * dt >= brake_at) v_lead = std::max(0.0, v_lead - decel * dt);
      const auto sm = filter.update(gap);
      const double v_cmd = follower_stopper({v_av, sm.gap, sm.gap_rate, U}, fs);
      v_av = std::max(0.0, v_av + act.step(v_av, v_cmd, dt) * dt);
      gap += (v_lead - v_av) * dt;
      CHECK(gap > 0.0);
    }
  }
}
