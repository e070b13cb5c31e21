#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "forgeline/common/mode.hpp"
#include "forgeline/common/zones.hpp"

namespace forgeline::fabric {

/// Small key-value cache with per-key atomic reads and writes.
class CacheStore {
 public:
  void put(const std::string& key, nlohmann::json value);
  std::optional<nlohmann::json> get(std::string_view key) const;
  bool erase(std::string_view key);
  std::size_t size() const;

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::string, nlohmann::json, std::less<>> entries_;
};

struct LogEntry {
  std::uint64_t sequence = 0;
  std::int64_t time_ns = 0;
  std::string type;  // "record", "snapshot", "production_change", ...
  nlohmann::json payload;
};

/// Append-only structured log for records, snapshots and production changes.
class TelemetryStore {
 public:
  std::uint64_t append(std::string type, std::int64_t time_ns, nlohmann::json payload);

  /// Entries with from_ns <= time_ns < to_ns, optionally of one type, in append order.
  std::vector<LogEntry> scan(std::int64_t from_ns, std::int64_t to_ns,
                             std::optional<std::string_view> type = std::nullopt) const;
  std::size_t size() const;
  std::size_t count(std::string_view type) const;

 private:
  mutable std::shared_mutex mutex_;
  std::vector<LogEntry> entries_;
};

/// Content-addressed blob store; identical bytes map to one immutable version id.
class AlgorithmStore {
 public:
  static std::string version_of(std::string_view bytes);

  std::string put(std::string bytes);
  std::string get(std::string_view version) const;  // NotFoundError
  bool contains(std::string_view version) const;
  std::vector<std::string> versions() const;

  /// One `<version>.bundle` file per blob.
  void save_dir(const std::filesystem::path& dir) const;
  void load_dir(const std::filesystem::path& dir);

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::string, std::less<>> blobs_;
};

struct ManagerSelection {
  std::string manager_id;
  std::string version;

  bool operator==(const ManagerSelection&) const = default;
};

/// Active manager and algorithm version per production mode; exactly one each.
class PowerConfigStore {
 public:
  PowerConfigStore();

  ManagerSelection get(Mode mode) const;
  void set(Mode mode, ManagerSelection selection);

  nlohmann::json to_json() const;
  void from_json(const nlohmann::json& j);

 private:
  mutable std::shared_mutex mutex_;
  std::map<Mode, ManagerSelection> active_;
};

struct ForgeSensorsState {
  Mode mode = Mode::NormalProduction;
  ZoneVector voltages{};
  std::string material_id;
  std::int64_t refreshed_ns = 0;
  std::uint64_t refresh_count = 0;
  bool valid = false;  // at least one successful refresh
  bool stale = false;
};

/// Cached plant state: active mode, current zone voltages, material in production.
class ForgeSensorsStore {
 public:
  ForgeSensorsState get() const;
  void update(Mode mode, const ZoneVector& voltages, std::string material_id, std::int64_t now_ns);
  void set_mode(Mode mode);
  void mark_stale();

 private:
  mutable std::shared_mutex mutex_;
  ForgeSensorsState state_;
};

struct Stores {
  CacheStore cache;
  TelemetryStore telemetry;
  AlgorithmStore algorithms;
  PowerConfigStore power_config;
  ForgeSensorsStore forge_sensors;
};

}  // namespace forgeline::fabric
