#include "ringsim/fuel.hpp"

#include <algorithm>
#include <cmath>

namespace ringsim {

namespace {
// Representative cruise speeds for the EPA anchor points.
constexpr double kCitySpeed = 9.5;      // m/s
constexpr double kHighwaySpeed = 21.6;  // m/s
constexpr double kFleetCityRef = 11.878;  // fleet-average city figure, scales size terms
constexpr double kMinIdle = 1.0e-4;       // liters/s
}  // namespace

double fuel_rate(double velocity, double acceleration, const FuelModelParams& p) {
  const double v = std::max(0.0, velocity);
  const double a_pos = std::max(0.0, acceleration);
  const double r =
      p.idle_rate + p.v_coeff * v + p.drag_coeff * v * v * v + p.accel_coeff * v * a_pos;
  return std::max(p.idle_rate, r);
}

FuelModelParams fuel_params_from_epa(double city_l_per_100km, double highway_l_per_100km) {
  FuelModelParams p;
  const double size = city_l_per_100km / kFleetCityRef;
  p.drag_coeff = 1.5e-8 * size;
  p.accel_coeff = 2.1e-4 * size;

  // liters per meter at the two cruise anchors
  const double mc = city_l_per_100km / 1.0e5;
  const double mh = highway_l_per_100km / 1.0e5;
  const double v1 = kCitySpeed, v2 = kHighwaySpeed;
  const double idle =
      (mc - mh - p.drag_coeff * (v1 * v1 - v2 * v2)) / (1.0 / v1 - 1.0 / v2);
  p.idle_rate = std::max(kMinIdle, idle);
  p.v_coeff = std::max(0.0, mc - p.idle_rate / v1 - p.drag_coeff * v1 * v1);
  return p;
}

}  // namespace ringsim
