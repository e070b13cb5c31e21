#pragma once

#include <array>
#include <cstddef>

namespace forgeline {

inline constexpr std::size_t kZoneCount = 5;
inline constexpr std::size_t kForgeSensorCount = 18;

/// Forge pyrometers per zone, in zone order.
inline constexpr std::array<std::size_t, kZoneCount> kForgeSensorsPerZone{2, 4, 4, 4, 4};

/// One value per furnace zone, zone 1 first.
using ZoneVector = std::array<double, kZoneCount>;

/// Index of the first forge sensor belonging to a 1-based zone.
constexpr std::size_t forge_sensor_offset(std::size_t zone) {
  std::size_t offset = 0;
  for (std::size_t z = 1; z < zone; ++z) offset += kForgeSensorsPerZone[z - 1];
  return offset;
}

static_assert(forge_sensor_offset(6) == kForgeSensorCount);

struct SensorLocation {
  std::size_t zone = 1;   // 1-based
  std::size_t local = 0;  // 0-based within the zone
};

/// Zone and in-zone position of a forge sensor index (0..17).
constexpr SensorLocation forge_sensor_zone(std::size_t index) {
  std::size_t zone = 1;
  while (zone < kZoneCount && index >= forge_sensor_offset(zone + 1)) ++zone;
  return {zone, index - forge_sensor_offset(zone)};
}

static_assert(forge_sensor_zone(0).zone == 1 && forge_sensor_zone(2).zone == 2 && forge_sensor_zone(17).local == 3);

}  // namespace forgeline
