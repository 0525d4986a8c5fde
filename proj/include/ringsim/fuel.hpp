#pragma once

namespace ringsim {

// Surrogate instantaneous fuel model: idle floor plus rolling, aerodynamic,
// and positive-acceleration demand. Coefficients are calibrated per vehicle
// from EPA city/highway figures; see fuel_params_from_epa.
struct FuelModelParams {
  double idle_rate = 7.0e-4;    // liters/s at standstill
  double v_coeff = 4.3e-5;      // liters per meter (rolling)
  double drag_coeff = 1.5e-8;   // liters * s^2 / m^3 (aero, ~v^3)
  double accel_coeff = 2.1e-4;  // liters * s / m^2, applied to a > 0 only
};

// Instantaneous consumption in liters/s. Never drops below idle_rate.
double fuel_rate(double velocity, double acceleration, const FuelModelParams& p);

// Two-point fit against EPA city/highway consumption (liters/100km) at
// representative cruise speeds. Guarantees nonnegative coefficients; the
// idle floor is clamped when the published figures are inverted (hybrids).
FuelModelParams fuel_params_from_epa(double city_l_per_100km, double highway_l_per_100km);

}  // namespace ringsim
