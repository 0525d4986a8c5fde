#include <stdexcept>
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "ringsim/fleet.hpp"
#include "ringsim/metrics.hpp"
#include "test_support.hpp"

using namespace ringsim;

namespace {

Interval whole(const TrajectoryDataset& d) { return {"all", 0.0, d.duration() + d.dt, false}; }

}  // namespace

TEST_CASE("spatial mean velocity") {
  std::vector<VehicleState> frame(3);
  for (auto& v : frame) v.velocity = 7.0;
  CHECK(spatial_mean_velocity(frame) == doctest::Approx(7.0));
  frame.resize(2);
  frame[0].velocity = 5.0;
  frame[1].velocity = 9.0;
  CHECK(spatial_mean_velocity(frame) == doctest::Approx(7.0));
  CHECK_THROWS_AS(spatial_mean_velocity({}), std::invalid_argument);
}

TEST_CASE("interval velocity statistics examples") {
  TrajectoryDataset d;
  d.dt = 1.0;
  VehicleSeries veh;
  veh.id = 1;
  veh.velocity = {6.0, 8.0};
  veh.position = {0.0, 7.0};
  veh.acceleration = {0.0, 0.0};
  veh.fuel_rate = {0.0, 0.0};
  d.vehicles.push_back(veh);
  const Interval iv{"all", 0.0, 2.0, false};
  CHECK(interval_velocity_mean(d, iv) == doctest::Approx(7.0));
  CHECK(interval_velocity_std(d, iv) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

  // constant data
  veh.velocity = {7.0, 7.0, 7.0};
  veh.position = {0.0, 7.0, 14.0};
  veh.acceleration = {0.0, 0.0, 0.0};
  veh.fuel_rate = {0.0, 0.0, 0.0};
  TrajectoryDataset c;
  c.dt = 1.0;
  c.vehicles.push_back(veh);
  CHECK(interval_velocity_std(c, whole(c)) == doctest::Approx(0.0));
}

TEST_CASE("velocity statistics match the two-pass oracle") {
  for (int trial = 0; trial < 30; ++trial) {
    const auto d = testsup::random_dataset(500 + trial);
    const Interval iv{"mid", 1.0, 8.0, false};
    CHECK(interval_velocity_mean(d, iv) ==
          doctest::Approx(oracle::mean_velocity(d, iv)).epsilon(1e-12));
    CHECK(interval_velocity_std(d, iv) ==
          doctest::Approx(oracle::velocity_std(d, iv)).epsilon(1e-12));
  }
}

TEST_CASE("mean shifts and std is invariant under a velocity offset") {
  auto d = testsup::random_dataset(77);
  const Interval iv = whole(d);
  const double mean0 = interval_velocity_mean(d, iv);
  const double std0 = interval_velocity_std(d, iv);
  for (auto& veh : d.vehicles)
    for (auto& v : veh.velocity) v += 2.5;
  CHECK(interval_velocity_mean(d, iv) == doctest::Approx(mean0 + 2.5).epsilon(1e-12));
  CHECK(interval_velocity_std(d, iv) == doctest::Approx(std0).epsilon(1e-9));
}

TEST_CASE("metrics are invariant under vehicle permutation") {
  auto d = testsup::random_dataset(78);
  const Interval iv = whole(d);
  const double std0 = interval_velocity_std(d, iv);
  const double fuel0 = interval_fuel_consumption(d, iv);
  const double rate0 = braking_event_rate(d, iv, 0.8);
  std::rotate(d.vehicles.begin(), d.vehicles.begin() + 2, d.vehicles.end());
  CHECK(interval_velocity_std(d, iv) == doctest::Approx(std0).epsilon(1e-12));
  CHECK(interval_fuel_consumption(d, iv) == doctest::Approx(fuel0).epsilon(1e-12));
  CHECK(braking_event_rate(d, iv, 0.8) == doctest::Approx(rate0).epsilon(1e-12));
}

TEST_CASE("fuel rate model") {
  FuelModelParams p;
  CHECK(fuel_rate(0.0, 0.0, p) == doctest::Approx(p.idle_rate));
  CHECK(fuel_rate(6.0, 1.0, p) > fuel_rate(6.0, 0.0, p));
  CHECK(fuel_rate(6.0, -3.0, p) == doctest::Approx(fuel_rate(6.0, 0.0, p)));
  CHECK(fuel_rate(8.0, 0.0, p) > fuel_rate(4.0, 0.0, p));
}

TEST_CASE("EPA calibration reproduces the fleet city figure at cruise") {
  // Oracle: fleet-average city consumption from the published table.
  const auto& table = reference_fleet_table();
  double city_sum = 0.0;
  for (int i = 0; i < 21; ++i) city_sum += table[i].city_l_per_100km;
  const double city_avg = city_sum / 21.0;

  const auto fleet = reference_fleet(21);
  double per100_sum = 0.0;
  for (const auto& veh : fleet) {
    const double rate = fuel_rate(7.5, 0.0, veh.fuel);  // liters/s at steady cruise
    per100_sum += rate * (100000.0 / 7.5) ;             // liters per 100 km
  }
  const double per100 = per100_sum / 21.0;
  CHECK(per100 > city_avg * 0.7);
  CHECK(per100 < city_avg * 1.3);
}

TEST_CASE("fuel consumption examples and oracle equivalence") {
  // one vehicle, constant rate and speed
  TrajectoryDataset d;
  d.dt = 0.5;
  VehicleSeries veh;
  veh.id = 1;
  const double r = 8e-4, v = 7.0;
  for (int j = 0; j < 100; ++j) {
    veh.position.push_back(v * 0.5 * j);
    veh.velocity.push_back(v);
    veh.acceleration.push_back(0.0);
    veh.fuel_rate.push_back(r);
  }
  d.vehicles.push_back(veh);
  CHECK(interval_fuel_consumption(d, whole(d)) ==
        doctest::Approx(100000.0 * r / v).epsilon(1e-9));

  SUBCASE("doubling the rates doubles the result") {
    auto d2 = d;
    for (auto& f : d2.vehicles[0].fuel_rate) f *= 2.0;
    CHECK(interval_fuel_consumption(d2, whole(d2)) ==
          doctest::Approx(2.0 * interval_fuel_consumption(d, whole(d))).epsilon(1e-12));
  }
  SUBCASE("random datasets match the trapezoid oracle") {
    for (int trial = 0; trial < 30; ++trial) {
      const auto rd = testsup::random_dataset(900 + trial);
      const Interval iv{"mid", 0.5, 9.0, false};
      CHECK(interval_fuel_consumption(rd, iv) ==
            doctest::Approx(oracle::fuel_per_100km(rd, iv)).epsilon(1e-9));
    }
  }
}

TEST_CASE("deceleration threshold") {
  // two vehicles whose acceleration samples have known standard deviations
  TrajectoryDataset d;
  d.dt = 1.0;
  for (int i = 0; i < 2; ++i) {
    VehicleSeries veh;
    veh.id = i + 1;
    const double s = (i == 0) ? 1.0 : 2.0;
    veh.acceleration = {-s, s, -s, s};  // sample std = s * sqrt(4/3)
    veh.velocity = {5, 5, 5, 5};
    veh.position = {0, 5, 10, 15};
    veh.fuel_rate = {0, 0, 0, 0};
    d.vehicles.push_back(veh);
  }
  const double base = std::sqrt(4.0 / 3.0);
  CHECK(deceleration_threshold(d, whole(d)) ==
        doctest::Approx(0.5 * (1.0 + 2.0) * base).epsilon(1e-12));

  SUBCASE("constant acceleration gives zero") {
    for (auto& veh : d.vehicles) veh.acceleration = {0.5, 0.5, 0.5, 0.5};
    CHECK(deceleration_threshold(d, whole(d)) == doctest::Approx(0.0));
  }
  SUBCASE("matches the per-vehicle oracle on random data") {
    for (int trial = 0; trial < 20; ++trial) {
      const auto rd = testsup::random_dataset(1200 + trial);
      const Interval iv{"mid", 2.0, 9.5, false};
      CHECK(deceleration_threshold(rd, iv) ==
            doctest::Approx(oracle::decel_threshold(rd, iv)).epsilon(1e-9));
    }
  }
}

TEST_CASE("braking peak counting") {
  const double tau = 1.0;
  SUBCASE("all zeros") {
    std::vector<double> a(50, 0.0);
    CHECK(count_braking_peaks(a, tau) == 0);
  }
  SUBCASE("one triangular pulse with ample prominence") {
    std::vector<double> a(40, 0.0);
    for (int k = 0; k < 9; ++k) a[10 + k] = -2.5 * tau * (1.0 - std::fabs(k - 4) / 5.0);
    CHECK(count_braking_peaks(a, tau) == 1);
  }
  SUBCASE("two pulses merged by an insufficient valley drop") {
    // peaks 1.6 tau with a valley at 0.9 tau: the valley fails to drop by
    // more than tau below either peak, so the pulses count as one event.
    std::vector<double> a(60, 0.0);
    auto pulse = [&](int center) {
      for (int k = -4; k <= 4; ++k)
        a[center + k] = std::min(a[center + k], -1.6 * tau * (1.0 - std::fabs(k) / 5.0));
    };
    pulse(20);
    pulse(28);
    // valley between the pulses
    a[24] = -0.9 * tau;
    CHECK(count_braking_peaks(a, tau) == 1);
  }
  SUBCASE("two well separated pulses count twice") {
    std::vector<double> a(80, 0.0);
    for (int c : {15, 50}) {
      for (int k = -4; k <= 4; ++k) a[c + k] = -3.0 * tau * (1.0 - std::fabs(k) / 5.0);
    }
    CHECK(count_braking_peaks(a, tau) == 2);
  }
  SUBCASE("count is nonincreasing in tau on smooth random signals") {
    for (int trial = 0; trial < 40; ++trial) {
      const auto d = testsup::random_dataset(1500 + trial, 1, 400);
      const auto& a = d.vehicles[0].acceleration;
      int prev = count_braking_peaks(a, 0.4);
      for (double t : {0.8, 1.2, 1.6, 2.0, 2.4}) {
        const int cur = count_braking_peaks(a, t);
        CHECK(cur <= prev);
        prev = cur;
      }
    }
  }
  SUBCASE("matches the restart-merge oracle on random signals") {
    for (int trial = 0; trial < 100; ++trial) {
      const auto d = testsup::random_dataset(1700 + trial, 1, 300);
      const auto& a = d.vehicles[0].acceleration;
      for (double t : {0.5, 1.0, 1.5}) {
        CHECK(count_braking_peaks(a, t) == oracle::braking_peaks(a, t));
      }
    }
  }
  SUBCASE("tau must be positive") {
    std::vector<double> a(10, 0.0);
    CHECK_THROWS_AS(count_braking_peaks(a, 0.0), std::invalid_argument);
  }
}

TEST_CASE("braking event rate") {
  SUBCASE("two events over half a kilometer") {
    TrajectoryDataset d;
    d.dt = 1.0;
    VehicleSeries veh;
    veh.id = 1;
    const int m = 100;
    veh.acceleration.assign(m, 0.0);
    for (int k = 0; k < 5; ++k) {
      veh.acceleration[20 + k] = -3.0;
      veh.acceleration[60 + k] = -3.0;
    }
    for (int j = 0; j < m; ++j) {
      veh.position.push_back(j * 500.0 / (m - 1));
      veh.velocity.push_back(5.0);
      veh.fuel_rate.push_back(0.0);
    }
    d.vehicles.push_back(veh);
    CHECK(braking_event_rate(d, whole(d), 1.0) == doctest::Approx(4.0).epsilon(1e-9));
  }
  SUBCASE("zero distance is an error") {
    TrajectoryDataset d;
    d.dt = 1.0;
    VehicleSeries veh;
    veh.id = 1;
    veh.acceleration = {0.0, 0.0, 0.0};
    veh.position = {5.0, 5.0, 5.0};
    veh.velocity = {0.0, 0.0, 0.0};
    veh.fuel_rate = {0, 0, 0};
    d.vehicles.push_back(veh);
    CHECK_THROWS_AS(braking_event_rate(d, whole(d), 1.0), std::invalid_argument);
  }
  SUBCASE("matches the oracle composition on random data") {
    for (int trial = 0; trial < 30; ++trial) {
      const auto rd = testsup::random_dataset(2100 + trial);
      const Interval iv{"mid", 1.0, 9.0, false};
      CHECK(braking_event_rate(rd, iv, 0.9) ==
            doctest::Approx(oracle::braking_rate(rd, iv, 0.9)).epsilon(1e-9));
    }
  }
}

TEST_CASE("throughput") {
  CHECK(throughput(21, 260.0, 7.17) == doctest::Approx(2084.7).epsilon(1e-3));
  CHECK(throughput(21, 260.0, 0.0) == doctest::Approx(0.0));
  CHECK(throughput(21, 260.0, 2.0 * 7.17) ==
        doctest::Approx(2.0 * throughput(21, 260.0, 7.17)).epsilon(1e-12));
  CHECK_THROWS_AS(throughput(21, 0.0, 7.0), std::invalid_argument);
  // formula inversion reproduces the published value
  const double v = 2085.0 * 260.0 / (21.0 * 3600.0);
  CHECK(throughput(21, 260.0, v) == doctest::Approx(2085.0).epsilon(5e-5));
}

TEST_CASE("wave onset detector") {
  SUBCASE("constant traffic never fires") {
    TrajectoryDataset d;
    d.dt = 0.5;
    for (int i = 0; i < 4; ++i) {
      VehicleSeries veh;
      veh.id = i + 1;
      for (int j = 0; j < 200; ++j) {
        veh.velocity.push_back(7.0);
        veh.position.push_back(3.5 * j);
        veh.acceleration.push_back(0.0);
        veh.fuel_rate.push_back(0.0);
      }
      d.vehicles.push_back(veh);
    }
    CHECK(!wave_onset_time(d, 2.5).has_value());
    // degenerate threshold: any spread fires immediately
    d.vehicles[0].velocity[0] = 7.1;
    CHECK(wave_onset_time(d, 0.0).value() == doctest::Approx(0.0));
  }
  SUBCASE("constructed crossing at 79 s") {
    // two vehicles whose spread ramps linearly: std = |dv| / sqrt(2)
    TrajectoryDataset d;
    d.dt = 1.0;
    for (int i = 0; i < 2; ++i) {
      VehicleSeries veh;
      veh.id = i + 1;
      for (int j = 0; j <= 200; ++j) {
        const double half = 0.5 * (j / 79.0) * 2.5 * std::sqrt(2.0) * 1.001;
        veh.velocity.push_back(7.0 + (i == 0 ? half : -half));
        veh.position.push_back(7.0 * j);
        veh.acceleration.push_back(0.0);
        veh.fuel_rate.push_back(0.0);
      }
      d.vehicles.push_back(veh);
    }
    const auto onset = wave_onset_time(d, 2.5);
    REQUIRE(onset.has_value());
    CHECK(*onset == doctest::Approx(79.0));
    // oracle agreement on the same data
    CHECK(*onset == doctest::Approx(oracle::wave_onset(d, 2.5).value()));
  }
}

TEST_CASE("report comparison row picks the best controlled interval") {
  MetricsReport rep;
  const auto row = [](const char* label, bool controlled, double vstd, double fuel, double brake,
                      double mean) {
    ReportRow r;
    r.interval = {label, 0.0, 10.0, controlled};
    r.velocity_std = vstd;
    r.fuel_per_100km = fuel;
    r.braking_rate = brake;
    r.velocity_mean = mean;
    r.throughput = mean * 21.0 / 260.0 * 3600.0;
    return r;
  };
  rep.rows.push_back(row("start", false, 1.9, 19.0, 1.7, 6.5));
  rep.rows.push_back(row("waves", false, 3.31, 24.6, 8.58, 6.28));
  rep.rows.push_back(row("control 6.50", true, 1.69, 18.0, 3.45, 6.1));
  rep.rows.push_back(row("control 7.50", true, 0.64, 14.1, 0.12, 7.17));
  const auto cmp = ws_ca_comparison(rep);
  REQUIRE(cmp.has_value());
  CHECK(cmp->ca_label == "control 7.50");
  // exact arithmetic on these figures is -80.66%; the published table's
  // -80.8 came from unrounded source data
  CHECK(cmp->velocity_std_pct == doctest::Approx(-80.664).epsilon(1e-4));
  CHECK(std::fabs(cmp->velocity_std_pct - (-80.8)) < 0.2);
  CHECK(cmp->fuel_pct == doctest::Approx((14.1 - 24.6) / 24.6 * 100.0));
  CHECK(cmp->braking_pct == doctest::Approx((0.12 - 8.58) / 8.58 * 100.0));

  MetricsReport no_ca;
  no_ca.rows.push_back(row("waves", false, 3.0, 20.0, 5.0, 6.0));
  CHECK(!ws_ca_comparison(no_ca).has_value());

  MetricsReport identical;
  identical.rows.push_back(row("waves", false, 2.0, 20.0, 5.0, 6.0));
  identical.rows.push_back(row("control", true, 2.0, 20.0, 5.0, 6.0));
  const auto same = ws_ca_comparison(identical);
  REQUIRE(same.has_value());
  CHECK(same->velocity_std_pct == doctest::Approx(0.0));
  CHECK(same->fuel_pct == doctest::Approx(0.0));
  CHECK(same->braking_pct == doctest::Approx(0.0));
  CHECK(same->throughput_pct == doctest::Approx(0.0));
}
