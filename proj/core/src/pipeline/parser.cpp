#include "forgeline/pipeline/parser.hpp"

#include <charconv>
#include <cmath>

#include <nlohmann/json.hpp>

#include "forgeline/common/error.hpp"

namespace forgeline::pipeline {

namespace {

std::optional<int> parse_int(std::string_view text) {
  int value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::optional<int> zone_of(std::string_view text) {
  auto z = parse_int(text);
  if (!z || *z < 1 || *z > static_cast<int>(kZoneCount)) return std::nullopt;
  return z;
}

}  // namespace

std::optional<TagInfo> resolve_tag(std::string_view tag) {
  if (tag == kModeTag) return TagInfo{TelemetryKind::Mode, {}};
  if (tag == kMaterialTag) return TagInfo{TelemetryKind::Material, {}};
  if (tag == kRodPositionTag) return TagInfo{TelemetryKind::Position, {}};
  if (tag == kRodVelocityTag) return TagInfo{TelemetryKind::Velocity, {}};
  if (tag.starts_with("T_Z")) {
    const auto sep = tag.find('_', 3);
    if (sep == std::string_view::npos) return std::nullopt;
    const auto zone = zone_of(tag.substr(3, sep - 3));
    const auto index = parse_int(tag.substr(sep + 1));
    if (!zone || !index) return std::nullopt;
    const auto z = static_cast<std::size_t>(*zone);
    if (*index < 1 || static_cast<std::size_t>(*index) > kForgeSensorsPerZone[z - 1]) return std::nullopt;
    return TagInfo{TelemetryKind::Temperature, static_cast<int>(forge_sensor_offset(z)) + *index - 1};
  }
  if (tag.starts_with("P_Z") || tag.starts_with("V_Z")) {
    const auto zone = zone_of(tag.substr(3));
    if (!zone) return std::nullopt;
    return TagInfo{tag[0] == 'P' ? TelemetryKind::Power : TelemetryKind::Voltage, *zone - 1};
  }
  return std::nullopt;
}

std::string raw_payload(std::string_view tag, const nlohmann::json& value, std::int64_t ts_ns) {
  return nlohmann::json{{"tag", tag}, {"value", value}, {"ts", ts_ns}}.dump();
}

std::variant<TelemetryRecord, std::string> parse_payload(const std::string& payload, std::int64_t ingest_ns) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(payload);
  } catch (const nlohmann::json::exception&) {
    return std::string("invalid json");
  }
  if (!j.is_object() || !j.contains("tag") || !j.contains("value") || !j.contains("ts")) {
    return std::string("missing field");
  }
  if (!j["tag"].is_string() || !j["ts"].is_number_integer()) return std::string("type mismatch");
  TelemetryRecord r;
  r.source_tag = j["tag"].get<std::string>();
  r.timestamp_ns = j["ts"].get<std::int64_t>();
  r.ingest_ns = ingest_ns;
  const auto info = resolve_tag(r.source_tag);
  if (!info) return std::string("unknown tag");
  r.kind = info->kind;
  r.sensor_index = info->index;
  const auto& value = j["value"];
  if (r.kind == TelemetryKind::Mode || r.kind == TelemetryKind::Material) {
    if (!value.is_string()) return std::string("type mismatch");
    r.text = value.get<std::string>();
    if (r.kind == TelemetryKind::Mode) {
      try {
        r.text = std::string(to_string(mode_from_string(r.text)));
      } catch (const Error&) {
        return std::string("unknown mode");
      }
    }
    return r;
  }
  if (!value.is_number()) return std::string("type mismatch");
  r.value = value.get<double>();
  if (!std::isfinite(r.value)) return std::string("non-finite value");
  if ((r.kind == TelemetryKind::Power || r.kind == TelemetryKind::Voltage) && r.value < 0.0) {
    return std::string("negative power");
  }
  return r;
}

TelemetryParser::TelemetryParser(std::shared_ptr<fabric::MessageBus> bus,
                                 std::optional<std::filesystem::path> dead_letter_path)
    : bus_(std::move(bus)) {
  if (dead_letter_path) {
    dead_log_.emplace(*dead_letter_path, std::ios::app);
    if (!*dead_log_) throw Error("cannot open dead-letter log " + dead_letter_path->string());
  }
}

TelemetryParser::~TelemetryParser() { stop(); }

void TelemetryParser::quarantine(const fabric::Message& message, std::string reason) {
  ++dead_;
  std::lock_guard lock(dead_mutex_);
  DeadLetter d{message.offset, message.payload, std::move(reason), message.timestamp_ns};
  if (dead_log_) {
    *dead_log_ << nlohmann::json{{"offset", d.offset}, {"payload", d.payload}, {"reason", d.reason},
                                 {"time_ns", d.time_ns}}
                      .dump()
               << '\n';
    dead_log_->flush();
  }
  dead_letters_.push_back(std::move(d));
}

std::optional<TelemetryRecord> TelemetryParser::handle(const fabric::Message& message) {
  ++in_;
  auto parsed = parse_payload(message.payload, message.timestamp_ns);
  if (auto* reason = std::get_if<std::string>(&parsed)) {
    quarantine(message, *reason);
    return std::nullopt;
  }
  TelemetryRecord record = std::get<TelemetryRecord>(std::move(parsed));
  auto [it, inserted] = last_ts_.try_emplace(record.source_tag, record.timestamp_ns);
  if (!inserted) {
    if (record.timestamp_ns < it->second) {
      quarantine(message, "timestamp went backwards");
      return std::nullopt;
    }
    it->second = record.timestamp_ns;
  }
  bus_->publish(fabric::topics::kReformattedTelemetry, nlohmann::json(record).dump());
  ++out_;
  latency_.add(static_cast<double>(bus_->clock()->now_ns() - message.timestamp_ns) / 1e6);
  return record;
}

void TelemetryParser::start(std::uint64_t from_offset) {
  if (running_.exchange(true)) return;
  processed_ = from_offset;
  worker_ = std::thread([this, from_offset] { run(from_offset); });
}

void TelemetryParser::stop() {
  running_ = false;
  if (worker_.joinable()) worker_.join();
}

void TelemetryParser::run(std::uint64_t from_offset) {
  fabric::Subscription sub = bus_->subscribe(fabric::topics::kTelemetry, from_offset);
  while (true) {
    auto msg = sub.poll(std::chrono::milliseconds(20));
    if (!msg) {
      if (!running_ || sub.closed()) break;
      continue;
    }
    handle(*msg);
    processed_ = msg->offset + 1;
  }
}

std::vector<DeadLetter> TelemetryParser::dead_letters() const {
  std::lock_guard lock(dead_mutex_);
  return dead_letters_;
}

}  // namespace forgeline::pipeline
