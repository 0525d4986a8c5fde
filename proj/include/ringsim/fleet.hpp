#pragma once

#include <vector>

#include "ringsim/ring.hpp"

namespace ringsim {

// Bundled 22-vehicle mixed passenger fleet (sedans, minivans, SUVs, pickups,
// one hybrid) with measured lengths and EPA consumption figures. Fuel model
// coefficients are calibrated from the EPA data. count must be in [2, 22];
// the first `count` vehicles are returned.
std::vector<VehicleSpec> reference_fleet(int count);

// Raw EPA figures for one fleet entry, used by calibration tests.
struct FleetEntry {
  int id;
  double length_m;
  double city_l_per_100km;
  double highway_l_per_100km;
};

const std::vector<FleetEntry>& reference_fleet_table();

}  // namespace ringsim
