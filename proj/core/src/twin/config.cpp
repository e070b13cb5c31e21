#include "forgeline/twin/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "forgeline/common/error.hpp"

namespace forgeline::twin {

std::string_view to_string(SensorMode mode) {
  return mode == SensorMode::Forge ? "Forge" : "Virtual";
}

SensorMode sensor_mode_from_string(std::string_view text) {
  if (text == "Forge" || text == "forge") return SensorMode::Forge;
  if (text == "Virtual" || text == "virtual") return SensorMode::Virtual;
  throw ConfigError("unknown sensor mode '" + std::string(text) + "'");
}

double TwinConfig::furnace_start() const {
  if (coil_layout.empty()) return 0.0;
  return std::min_element(coil_layout.begin(), coil_layout.end(),
                          [](const Coil& a, const Coil& b) { return a.start_m < b.start_m; })
      ->start_m;
}

double TwinConfig::furnace_end() const {
  if (coil_layout.empty()) return 0.0;
  return std::max_element(coil_layout.begin(), coil_layout.end(),
                          [](const Coil& a, const Coil& b) { return a.end_m < b.end_m; })
      ->end_m;
}

double TwinConfig::track_end() const {
  return track_end_m > 0.0 ? track_end_m : furnace_end() + 5.0;
}

std::vector<Coil> default_coil_layout(double offset_m, double coil_m, double gap_m) {
  std::vector<Coil> layout;
  const double pitch = coil_m + gap_m;
  for (int k = 1; k <= 20; ++k) {
    const double start = offset_m + (k - 1) * pitch;
    layout.push_back({k <= 16 ? (k - 1) / 4 + 1 : 5, k, start, start + coil_m});
  }
  const double start = offset_m + 20 * pitch;
  const double half = coil_m / 2.0;
  layout.push_back({5, 21, start, start + half});
  layout.push_back({5, 21, start + half + gap_m, start + coil_m + gap_m});
  return layout;
}

std::vector<double> default_forge_sensor_positions(const std::vector<Coil>& layout) {
  std::vector<Coil> sorted = layout;
  std::sort(sorted.begin(), sorted.end(),
            [](const Coil& a, const Coil& b) { return a.start_m < b.start_m; });

  // Gap centers, attributed to the zone of the piece in front of the gap.
  std::array<std::vector<double>, kZoneCount> gaps;
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    const double center = 0.5 * (sorted[i].end_m + sorted[i + 1].start_m);
    gaps.at(static_cast<std::size_t>(sorted[i].zone - 1)).push_back(center);
  }

  std::vector<double> positions;
  for (std::size_t z = 0; z < kZoneCount; ++z) {
    const std::size_t wanted = kForgeSensorsPerZone[z];
    const std::size_t available = gaps[z].size();
    if (available < wanted) {
      throw ConfigError("zone " + std::to_string(z + 1) + " has " + std::to_string(available) +
                        " gaps but needs " + std::to_string(wanted) + " forge sensors");
    }
    for (std::size_t i = 0; i < wanted; ++i) {
      positions.push_back(gaps[z][(i + 1) * available / wanted - 1]);
    }
  }
  return positions;
}

std::vector<double> default_virtual_sensor_positions(const std::vector<Coil>& layout,
                                                     const std::vector<double>& forge_positions,
                                                     int zone, int count) {
  if (zone < 1 || zone > static_cast<int>(kZoneCount) || count < 2) {
    throw ConfigError("virtual sensors need a valid zone and at least two positions");
  }
  double first = 0.0;
  bool found = false;
  for (const Coil& c : layout) {
    if (c.zone == zone && (!found || c.start_m < first)) {
      first = c.start_m;
      found = true;
    }
  }
  if (!found) throw ConfigError("zone " + std::to_string(zone) + " has no coils");
  const std::size_t last_index =
      forge_sensor_offset(static_cast<std::size_t>(zone)) + kForgeSensorsPerZone[zone - 1] - 1;
  const double last = forge_positions.at(last_index);

  std::vector<double> positions(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    positions[static_cast<std::size_t>(i)] = first + (last - first) * i / (count - 1);
  }
  positions.back() = last;
  return positions;
}

std::array<TempBand, kZoneCount> default_zone_temp_bands() {
  // Only zone 3 has fixed limits; the others are placeholders.
  return {{{850.0, 950.0, 1050.0},
           {1000.0, 1075.0, 1150.0},
           {1140.0, 1207.5, 1275.0},
           {1180.0, 1230.0, 1280.0},
           {1200.0, 1240.0, 1280.0}}};
}

TwinConfig default_twin_config(double offset_m) {
  TwinConfig config;
  config.coil_layout = default_coil_layout(offset_m);
  config.sensor_positions_forge = default_forge_sensor_positions(config.coil_layout);
  config.sensor_positions_virtual[2] =
      default_virtual_sensor_positions(config.coil_layout, config.sensor_positions_forge, 3);
  config.zone_temp_bands = default_zone_temp_bands();
  return config;
}

void validate(const TwinConfig& c) {
  auto fail = [](const std::string& what) { throw ConfigError("invalid twin config: " + what); };

  if (!(c.step_seconds > 0.0)) fail("step_seconds must be > 0");
  if (c.total_steps < 0) fail("total_steps must be >= 0");
  if (!(c.segment_length > 0.0)) fail("segment_length must be > 0");
  if (!(c.power_bounds.first >= 0.0)) fail("power_bounds.min must be >= 0");
  if (!(c.power_bounds.first <= c.power_bounds.second)) fail("power_bounds.min > power_bounds.max");
  if (!(c.heating_gain >= 0.0)) fail("heating_gain must be >= 0");
  if (!(c.cooling_rate >= 0.0) || !(c.cooling_rate * c.step_seconds < 1.0)) {
    fail("cooling_rate * step_seconds must lie in [0, 1)");
  }
  if (!(c.power_action_step >= 0.0)) fail("power_action_step must be >= 0");
  if (!(c.zone_resistance_ohm > 0.0)) fail("zone_resistance_ohm must be > 0");
  if (!std::isfinite(c.ambient_temp)) fail("ambient_temp must be finite");
  for (double p : c.initial_powers) {
    if (p < c.power_bounds.first || p > c.power_bounds.second) {
      fail("initial power " + std::to_string(p) + " outside power_bounds");
    }
  }

  if (c.coil_layout.empty()) fail("coil_layout is empty");
  std::map<int, std::set<int>> coils_per_zone;
  for (const Coil& coil : c.coil_layout) {
    if (coil.zone < 1 || coil.zone > static_cast<int>(kZoneCount)) fail("coil zone out of range");
    if (!(coil.start_m < coil.end_m)) fail("coil start must precede its end");
    coils_per_zone[coil.zone].insert(coil.index);
  }
  for (int z = 1; z <= static_cast<int>(kZoneCount); ++z) {
    const std::size_t expected = z == 5 ? 5 : 4;
    if (coils_per_zone[z].size() != expected) {
      fail("zone " + std::to_string(z) + " must have " + std::to_string(expected) + " coils");
    }
  }
  std::vector<Coil> sorted = c.coil_layout;
  std::sort(sorted.begin(), sorted.end(),
            [](const Coil& a, const Coil& b) { return a.start_m < b.start_m; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].start_m < sorted[i - 1].end_m) fail("coils overlap");
  }

  if (c.sensor_positions_forge.size() != kForgeSensorCount) fail("expected 18 forge sensor positions");
  for (const TempBand& band : c.zone_temp_bands) {
    if (!(band.min_c <= band.target_c && band.target_c <= band.max_c)) {
      fail("zone temperature band must satisfy min <= target <= max");
    }
  }
  if (c.zone_temp_bands[2].min_c != 1140.0 || c.zone_temp_bands[2].max_c != 1275.0) {
    fail("zone 3 band must span 1140..1275 degC");
  }
  if (c.mode == Mode::Warmholding) {
    if (!(c.warmhold_span.first < c.warmhold_span.second)) fail("warmhold_span must be non-empty");
    if (!(c.warmhold_speed > 0.0)) fail("warmhold_speed must be > 0");
  }
  if (c.track_end() <= 0.0) fail("track end must be positive");
}

namespace {

nlohmann::json coil_to_json(const Coil& c) {
  return {{"zone", c.zone}, {"index", c.index}, {"start_m", c.start_m}, {"end_m", c.end_m}};
}

template <typename T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

}  // namespace

void to_json(nlohmann::json& j, const TwinConfig& c) {
  nlohmann::json coils = nlohmann::json::array();
  for (const Coil& coil : c.coil_layout) coils.push_back(coil_to_json(coil));
  nlohmann::json bands = nlohmann::json::array();
  for (const TempBand& b : c.zone_temp_bands) bands.push_back({b.min_c, b.target_c, b.max_c});
  j = {{"step_seconds", c.step_seconds},
       {"total_steps", c.total_steps},
       {"rod_velocity", c.rod_velocity},
       {"initial_powers", c.initial_powers},
       {"coil_layout", coils},
       {"sensor_positions_forge", c.sensor_positions_forge},
       {"sensor_positions_virtual", c.sensor_positions_virtual},
       {"sensor_mode", to_string(c.sensor_mode)},
       {"ambient_temp", c.ambient_temp},
       {"heating_gain", c.heating_gain},
       {"cooling_rate", c.cooling_rate},
       {"segment_length", c.segment_length},
       {"zone_temp_bands", bands},
       {"mode", to_string(c.mode)},
       {"warmhold_span", {c.warmhold_span.first, c.warmhold_span.second}},
       {"warmhold_speed", c.warmhold_speed},
       {"power_action_step", c.power_action_step},
       {"power_bounds", {c.power_bounds.first, c.power_bounds.second}},
       {"zone_resistance_ohm", c.zone_resistance_ohm},
       {"track_end_m", c.track_end_m}};
}

void from_json(const nlohmann::json& j, TwinConfig& c) {
  if (!j.is_object()) throw ConfigError("twin config must be a JSON object");
  try {
    if (j.contains("layout_offset_m")) {
      const double offset = j.at("layout_offset_m").get<double>();
      c.coil_layout = default_coil_layout(offset);
      c.sensor_positions_forge = default_forge_sensor_positions(c.coil_layout);
      c.sensor_positions_virtual = {};
      c.sensor_positions_virtual[2] =
          default_virtual_sensor_positions(c.coil_layout, c.sensor_positions_forge, 3);
    }
    read_if(j, "step_seconds", c.step_seconds);
    read_if(j, "total_steps", c.total_steps);
    read_if(j, "rod_velocity", c.rod_velocity);
    read_if(j, "initial_powers", c.initial_powers);
    if (j.contains("coil_layout")) {
      c.coil_layout.clear();
      for (const auto& item : j.at("coil_layout")) {
        c.coil_layout.push_back({item.at("zone").get<int>(), item.at("index").get<int>(),
                                 item.at("start_m").get<double>(), item.at("end_m").get<double>()});
      }
    }
    read_if(j, "sensor_positions_forge", c.sensor_positions_forge);
    read_if(j, "sensor_positions_virtual", c.sensor_positions_virtual);
    if (j.contains("sensor_mode")) c.sensor_mode = sensor_mode_from_string(j.at("sensor_mode").get<std::string>());
    read_if(j, "ambient_temp", c.ambient_temp);
    read_if(j, "heating_gain", c.heating_gain);
    read_if(j, "cooling_rate", c.cooling_rate);
    read_if(j, "segment_length", c.segment_length);
    if (j.contains("zone_temp_bands")) {
      const auto& bands = j.at("zone_temp_bands");
      if (bands.size() != kZoneCount) throw ConfigError("zone_temp_bands needs 5 entries");
      for (std::size_t z = 0; z < kZoneCount; ++z) {
        c.zone_temp_bands[z] = {bands[z].at(0).get<double>(), bands[z].at(1).get<double>(),
                                bands[z].at(2).get<double>()};
      }
    }
    if (j.contains("mode")) c.mode = mode_from_string(j.at("mode").get<std::string>());
    if (j.contains("warmhold_span")) {
      c.warmhold_span = {j.at("warmhold_span").at(0).get<double>(), j.at("warmhold_span").at(1).get<double>()};
    }
    read_if(j, "warmhold_speed", c.warmhold_speed);
    read_if(j, "power_action_step", c.power_action_step);
    if (j.contains("power_bounds")) {
      c.power_bounds = {j.at("power_bounds").at(0).get<double>(), j.at("power_bounds").at(1).get<double>()};
    }
    read_if(j, "zone_resistance_ohm", c.zone_resistance_ohm);
    read_if(j, "track_end_m", c.track_end_m);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed twin config: ") + e.what());
  }
}

TwinConfig load_twin_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open twin config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  TwinConfig config = default_twin_config();
  from_json(j, config);
  validate(config);
  return config;
}

}  // namespace forgeline::twin
