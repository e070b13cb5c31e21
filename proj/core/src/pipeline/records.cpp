#include "forgeline/pipeline/records.hpp"

#include <nlohmann/json.hpp>

#include "forgeline/common/error.hpp"

namespace forgeline::pipeline {

std::string_view to_string(TelemetryKind kind) {
  switch (kind) {
    case TelemetryKind::Temperature: return "temperature";
    case TelemetryKind::Position: return "position";
    case TelemetryKind::Velocity: return "velocity";
    case TelemetryKind::Power: return "power";
    case TelemetryKind::Voltage: return "voltage";
    case TelemetryKind::Mode: return "mode";
    case TelemetryKind::Material: return "material";
  }
  return "temperature";
}

TelemetryKind telemetry_kind_from_string(std::string_view text) {
  for (TelemetryKind k : {TelemetryKind::Temperature, TelemetryKind::Position, TelemetryKind::Velocity,
                          TelemetryKind::Power, TelemetryKind::Voltage, TelemetryKind::Mode, TelemetryKind::Material}) {
    if (to_string(k) == text) return k;
  }
  throw ConfigError("unknown telemetry kind '" + std::string(text) + "'");
}

std::string temperature_tag(int zone, int index) {
  return "T_Z" + std::to_string(zone) + "_" + std::to_string(index);
}
std::string power_tag(int zone) { return "P_Z" + std::to_string(zone); }
std::string voltage_tag(int zone) { return "V_Z" + std::to_string(zone); }

void to_json(nlohmann::json& j, const TelemetryRecord& r) {
  j = {{"schema", kRecordSchema},
       {"tag", r.source_tag},
       {"kind", std::string(to_string(r.kind))},
       {"ts", r.timestamp_ns},
       {"ingest_ns", r.ingest_ns}};
  if (r.kind == TelemetryKind::Mode || r.kind == TelemetryKind::Material) {
    j["text"] = r.text;
  } else {
    j["value"] = r.value;
  }
  if (r.sensor_index) j["sensor_index"] = *r.sensor_index;
}

void from_json(const nlohmann::json& j, TelemetryRecord& r) {
  r.source_tag = j.at("tag").get<std::string>();
  r.kind = telemetry_kind_from_string(j.at("kind").get<std::string>());
  r.timestamp_ns = j.at("ts").get<std::int64_t>();
  r.ingest_ns = j.value("ingest_ns", std::int64_t{0});
  if (r.kind == TelemetryKind::Mode || r.kind == TelemetryKind::Material) {
    r.text = j.at("text").get<std::string>();
  } else {
    r.value = j.at("value").get<double>();
  }
  if (j.contains("sensor_index")) r.sensor_index = j.at("sensor_index").get<int>();
}

std::optional<std::array<double, kForgeSensorCount + kZoneCount>> StateSnapshot::features() const {
  std::array<double, kForgeSensorCount + kZoneCount> out{};
  for (std::size_t i = 0; i < kForgeSensorCount; ++i) {
    if (!temps[i]) return std::nullopt;
    out[i] = *temps[i];
  }
  for (std::size_t z = 0; z < kZoneCount; ++z) {
    if (!powers[z]) return std::nullopt;
    out[kForgeSensorCount + z] = *powers[z];
  }
  return out;
}

namespace {

template <std::size_t N>
nlohmann::json optional_array(const std::array<std::optional<double>, N>& values) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& v : values) arr.push_back(v ? nlohmann::json(*v) : nlohmann::json(nullptr));
  return arr;
}

template <std::size_t N>
void read_optional_array(const nlohmann::json& j, std::array<std::optional<double>, N>& out) {
  if (!j.is_array() || j.size() != N) throw ConfigError("snapshot array has the wrong length");
  for (std::size_t i = 0; i < N; ++i) {
    out[i] = j[i].is_null() ? std::nullopt : std::optional<double>(j[i].get<double>());
  }
}

}  // namespace

void to_json(nlohmann::json& j, const StateSnapshot& s) {
  j = {{"schema", kRecordSchema},
       {"seq", s.seq},
       {"snapshot_time_ns", s.snapshot_time_ns},
       {"temps", optional_array(s.temps)},
       {"powers", optional_array(s.powers)},
       {"voltages", optional_array(s.voltages)},
       {"mode", s.mode ? nlohmann::json(std::string(to_string(*s.mode))) : nlohmann::json(nullptr)},
       {"material_id", s.material_id ? nlohmann::json(*s.material_id) : nlohmann::json(nullptr)},
       {"rod_front_m", s.rod_front_m ? nlohmann::json(*s.rod_front_m) : nlohmann::json(nullptr)},
       {"completeness", s.completeness},
       {"missing", s.missing},
       {"published_ns", s.published_ns}};
}

void from_json(const nlohmann::json& j, StateSnapshot& s) {
  s.seq = j.at("seq").get<std::uint64_t>();
  s.snapshot_time_ns = j.at("snapshot_time_ns").get<std::int64_t>();
  read_optional_array(j.at("temps"), s.temps);
  read_optional_array(j.at("powers"), s.powers);
  read_optional_array(j.at("voltages"), s.voltages);
  const auto& mode = j.at("mode");
  s.mode = mode.is_null() ? std::nullopt : std::optional<Mode>(mode_from_string(mode.get<std::string>()));
  const auto& material = j.at("material_id");
  s.material_id = material.is_null() ? std::nullopt : std::optional<std::string>(material.get<std::string>());
  const auto& rod = j.at("rod_front_m");
  s.rod_front_m = rod.is_null() ? std::nullopt : std::optional<double>(rod.get<double>());
  s.completeness = j.at("completeness").get<double>();
  s.missing = j.value("missing", std::vector<std::string>{});
  s.published_ns = j.value("published_ns", std::int64_t{0});
}

}  // namespace forgeline::pipeline
