#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "forgeline/fabric/bus.hpp"
#include "forgeline/fabric/stores.hpp"
#include "forgeline/pipeline/records.hpp"

namespace forgeline::pipeline {

inline constexpr double kDefaultCompletenessThreshold = 0.9;

/// Second containing `ts_ns`, as the nanosecond timestamp of its start.
std::int64_t snapshot_second(std::int64_t ts_ns);

/// Latest-timestamp-wins fusion of one second of records; ties go to the later
/// record. Records from other seconds are ignored.
StateSnapshot build_snapshot(std::int64_t second_ns, const std::vector<TelemetryRecord>& records);

struct SnapshotSettings {
  double completeness_threshold = kDefaultCompletenessThreshold;
  /// Open windows close once the clock passes their end by this much without
  /// a newer record arriving.
  std::int64_t grace_ns = 2 * kNanosPerSecond;
  bool store_records = true;
};

struct SnapshotStats {
  std::uint64_t records = 0;
  std::uint64_t late_records = 0;
  std::uint64_t windows = 0;
  std::uint64_t published = 0;
  std::uint64_t incomplete = 0;
  std::uint64_t production_changes = 0;
};

/// Collects reformatted records into per-second windows (event time) and
/// publishes complete snapshots to "state_snapshots".
class SnapshotBuilder {
 public:
  SnapshotBuilder(std::shared_ptr<fabric::MessageBus> bus, fabric::Stores& stores, SnapshotSettings settings = {});
  ~SnapshotBuilder();

  SnapshotBuilder(const SnapshotBuilder&) = delete;
  SnapshotBuilder& operator=(const SnapshotBuilder&) = delete;

  /// A record for a newer second closes every older open window first.
  void add(const TelemetryRecord& record);
  /// Closes windows whose end + grace is before `now_ns`.
  void close_expired(std::int64_t now_ns);
  /// Closes every open window.
  void flush();

  void start(std::uint64_t from_offset);
  void stop();

  SnapshotStats stats() const;
  std::uint64_t processed_offset() const { return processed_.load(); }

 private:
  void close_window(std::int64_t second_ns, std::vector<TelemetryRecord> records);
  void run(std::uint64_t from_offset);

  std::shared_ptr<fabric::MessageBus> bus_;
  fabric::Stores& stores_;
  SnapshotSettings settings_;

  mutable std::mutex mutex_;
  std::map<std::int64_t, std::vector<TelemetryRecord>> open_;
  std::optional<std::int64_t> last_closed_;
  std::optional<std::string> last_material_;
  std::uint64_t next_seq_ = 0;
  SnapshotStats stats_;

  std::atomic<bool> running_{false};
  std::atomic<std::uint64_t> processed_{0};
  std::thread worker_;
};

}  // namespace forgeline::pipeline
