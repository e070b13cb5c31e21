#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "forgeline/common/mode.hpp"
#include "forgeline/common/zones.hpp"

namespace forgeline::pipeline {

inline constexpr int kRecordSchema = 1;

enum class TelemetryKind { Temperature, Position, Velocity, Power, Voltage, Mode, Material };

std::string_view to_string(TelemetryKind kind);
TelemetryKind telemetry_kind_from_string(std::string_view text);

/// One reformatted reading. Numeric kinds use `value`; Mode and Material use `text`.
struct TelemetryRecord {
  std::string source_tag;
  TelemetryKind kind = TelemetryKind::Temperature;
  double value = 0.0;
  std::string text;
  std::int64_t timestamp_ns = 0;
  std::optional<int> sensor_index;  // forge sensor (0..17) or zone (0..4)
  std::int64_t ingest_ns = 0;       // publish time of the raw message

  bool operator==(const TelemetryRecord&) const = default;
};

void to_json(nlohmann::json& j, const TelemetryRecord& r);
void from_json(const nlohmann::json& j, TelemetryRecord& r);

/// Tag naming on the plant gateway.
std::string temperature_tag(int zone, int index);  // T_Z{zone}_{index}, both 1-based
std::string power_tag(int zone);                    // P_Z{zone}
std::string voltage_tag(int zone);                  // V_Z{zone}
inline constexpr std::string_view kModeTag = "MODE";
inline constexpr std::string_view kMaterialTag = "MATERIAL";
inline constexpr std::string_view kRodPositionTag = "ROD_POS";
inline constexpr std::string_view kRodVelocityTag = "ROD_VEL";

/// Expected fields per snapshot: 18 temperatures, 5 powers, mode and material.
inline constexpr std::size_t kExpectedSnapshotFields = kForgeSensorCount + kZoneCount + 2;

/// Per-second fused plant state. Temperatures follow forge sensor order
/// (zone 1 first), powers and voltages zone order.
struct StateSnapshot {
  std::uint64_t seq = 0;
  std::int64_t snapshot_time_ns = 0;  // start of the covered second
  std::array<std::optional<double>, kForgeSensorCount> temps{};
  std::array<std::optional<double>, kZoneCount> powers{};
  std::array<std::optional<double>, kZoneCount> voltages{};
  std::optional<Mode> mode;
  std::optional<std::string> material_id;
  std::optional<double> rod_front_m;
  double completeness = 0.0;
  std::vector<std::string> missing;
  std::int64_t published_ns = 0;

  /// 18 temperatures then 5 powers, or nullopt when any is missing.
  std::optional<std::array<double, kForgeSensorCount + kZoneCount>> features() const;

  bool operator==(const StateSnapshot&) const = default;
};

void to_json(nlohmann::json& j, const StateSnapshot& s);
void from_json(const nlohmann::json& j, StateSnapshot& s);

}  // namespace forgeline::pipeline
