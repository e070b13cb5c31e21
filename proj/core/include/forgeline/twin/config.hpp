#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "forgeline/common/mode.hpp"
#include "forgeline/common/zones.hpp"

namespace forgeline::twin {

using forgeline::Mode;
using forgeline::mode_from_string;
using forgeline::to_string;

enum class SensorMode { Forge, Virtual };

std::string_view to_string(SensorMode mode);
SensorMode sensor_mode_from_string(std::string_view text);

/// One heated span of the furnace. The split last coil contributes two pieces
/// sharing a coil index.
struct Coil {
  int zone = 1;   // 1-based
  int index = 1;  // 1-based coil number
  double start_m = 0.0;
  double end_m = 0.0;
};

struct TempBand {
  double min_c = 0.0;
  double target_c = 0.0;
  double max_c = 0.0;
};

struct TwinConfig {
  double step_seconds = 1.0;
  int total_steps = 2000;
  double rod_velocity = 0.1;  // m/s
  ZoneVector initial_powers{300.0, 350.0, 200.0, 150.0, 100.0};
  std::vector<Coil> coil_layout;
  std::vector<double> sensor_positions_forge;                          // 18, zone order
  std::array<std::vector<double>, kZoneCount> sensor_positions_virtual;  // per zone
  SensorMode sensor_mode = SensorMode::Forge;
  double ambient_temp = 25.0;
  double heating_gain = 0.01;   // degC per second per kW, inside a live coil
  double cooling_rate = 0.005;  // 1/s, outside live coils
  double segment_length = 0.05;
  std::array<TempBand, kZoneCount> zone_temp_bands{};
  Mode mode = Mode::NormalProduction;
  std::pair<double, double> warmhold_span{0.0, 0.0};
  double warmhold_speed = 0.05;  // m/s
  double power_action_step = 5.0;
  std::pair<double, double> power_bounds{10.0, 600.0};
  double zone_resistance_ohm = 0.2;  // P[kW] * 1000 = V^2 / R
  double track_end_m = 0.0;          // 0 means last coil end + 5 m

  /// Last coil end plus the exit run-out when track_end_m is unset.
  double track_end() const;
  double furnace_start() const;
  double furnace_end() const;
};

/// 21 coils: four per zone for zones 1-4, five in zone 5; the last coil is split
/// into two halves with an extra gap. `offset_m` shifts the whole layout.
std::vector<Coil> default_coil_layout(double offset_m = 0.0, double coil_m = 1.0,
                                      double gap_m = 0.25);

/// One forge sensor per inter-coil gap, 2/4/4/4/4 across zones.
std::vector<double> default_forge_sensor_positions(const std::vector<Coil>& layout);

/// Evenly spaced positions from the zone's first coil start to its last forge sensor.
std::vector<double> default_virtual_sensor_positions(const std::vector<Coil>& layout,
                                                     const std::vector<double>& forge_positions,
                                                     int zone, int count = 15);

std::array<TempBand, kZoneCount> default_zone_temp_bands();

/// Plant-like defaults; layout starts at `offset_m` from the warehouse origin.
TwinConfig default_twin_config(double offset_m = 0.0);

/// Throws ConfigError describing the first violated invariant.
void validate(const TwinConfig& config);

void to_json(nlohmann::json& j, const TwinConfig& config);
void from_json(const nlohmann::json& j, TwinConfig& config);

/// Reads a JSON object of overrides on top of default_twin_config().
TwinConfig load_twin_config(const std::filesystem::path& path);

}  // namespace forgeline::twin
