#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "forgeline/common/clock.hpp"
#include "forgeline/fabric/bus.hpp"
#include "forgeline/pipeline/latency.hpp"
#include "forgeline/pipeline/records.hpp"

namespace forgeline::pipeline {

struct DeadLetter {
  std::uint64_t offset = 0;
  std::string payload;
  std::string reason;
  std::int64_t time_ns = 0;
};

/// Where a tag maps in the plant vectors.
struct TagInfo {
  TelemetryKind kind = TelemetryKind::Temperature;
  std::optional<int> index;
};

/// Resolves T_Z{z}_{i}, P_Z{z}, V_Z{z}, ROD_POS, ROD_VEL, MODE and MATERIAL.
std::optional<TagInfo> resolve_tag(std::string_view tag);

/// Raw gateway payload: {"tag": name, "value": scalar, "ts": ns}.
std::string raw_payload(std::string_view tag, const nlohmann::json& value, std::int64_t ts_ns);

/// Stateless part of parsing: a typed record or the dead-letter reason.
std::variant<TelemetryRecord, std::string> parse_payload(const std::string& payload, std::int64_t ingest_ns);

/// Telemetry parser service: raw "telemetry" messages in, typed records out on
/// "reformatted_telemetry", malformed ones quarantined with a reason.
class TelemetryParser {
 public:
  TelemetryParser(std::shared_ptr<fabric::MessageBus> bus, std::optional<std::filesystem::path> dead_letter_path = {});
  ~TelemetryParser();

  TelemetryParser(const TelemetryParser&) = delete;
  TelemetryParser& operator=(const TelemetryParser&) = delete;

  /// Parses one message; also enforces per-tag non-decreasing timestamps.
  std::optional<TelemetryRecord> handle(const fabric::Message& message);

  void start(std::uint64_t from_offset);
  void stop();

  std::uint64_t records_in() const { return in_.load(); }
  std::uint64_t reformatted() const { return out_.load(); }
  std::uint64_t dead_lettered() const { return dead_.load(); }
  std::uint64_t processed_offset() const { return processed_.load(); }
  std::vector<DeadLetter> dead_letters() const;
  /// Raw publish to reformatted publish, one sample per reformatted record.
  std::vector<double> latency_ms() const { return latency_.values(); }

 private:
  void quarantine(const fabric::Message& message, std::string reason);
  void run(std::uint64_t from_offset);

  std::shared_ptr<fabric::MessageBus> bus_;
  std::map<std::string, std::int64_t, std::less<>> last_ts_;
  mutable std::mutex dead_mutex_;
  std::vector<DeadLetter> dead_letters_;
  std::optional<std::ofstream> dead_log_;
  LatencySamples latency_;
  std::atomic<std::uint64_t> in_{0};
  std::atomic<std::uint64_t> out_{0};
  std::atomic<std::uint64_t> dead_{0};
  std::atomic<std::uint64_t> processed_{0};
  std::atomic<bool> running_{false};
  std::thread worker_;
};

}  // namespace forgeline::pipeline
