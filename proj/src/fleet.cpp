#include "ringsim/fleet.hpp"

#include <stdexcept>

#include "ringsim/fuel.hpp"

namespace ringsim {

const std::vector<FleetEntry>& reference_fleet_table() {
  static const std::vector<FleetEntry> table = {
      {1, 5.22, 15.67, 10.68}, {2, 5.15, 13.83, 9.47},  {3, 4.86, 9.47, 6.53},
      {4, 4.87, 10.69, 7.13},  {5, 5.15, 13.83, 9.47},  {6, 5.15, 13.83, 9.41},
      {7, 4.86, 9.41, 6.53},   {8, 4.92, 8.71, 6.37},   {9, 5.09, 13.07, 7.84},
      {10, 4.86, 9.41, 6.53},  {11, 4.86, 9.80, 6.92},  {12, 5.69, 14.71, 10.22},
      {13, 5.21, 13.07, 9.80}, {14, 5.15, 13.83, 9.41}, {15, 4.87, 10.70, 7.13},
      {16, 5.15, 13.83, 9.41}, {17, 4.86, 9.41, 6.53},  {18, 4.87, 10.70, 7.13},
      {19, 5.15, 13.83, 9.41}, {20, 5.70, 14.71, 10.22}, {21, 4.44, 6.92, 7.84},
      {22, 5.15, 13.83, 9.41},
  };
  return table;
}

std::vector<VehicleSpec> reference_fleet(int count) {
  const auto& table = reference_fleet_table();
  if (count < 2 || count > static_cast<int>(table.size())) {
    throw std::invalid_argument("reference_fleet: count out of range");
  }
  std::vector<VehicleSpec> fleet;
  fleet.reserve(count);
  for (int i = 0; i < count; ++i) {
    const auto& e = table[i];
    fleet.push_back({e.id, e.length_m, fuel_params_from_epa(e.city_l_per_100km, e.highway_l_per_100km)});
  }
  return fleet;
}

}  // namespace ringsim
