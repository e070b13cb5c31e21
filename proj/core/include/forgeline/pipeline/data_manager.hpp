#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "forgeline/common/clock.hpp"
#include "forgeline/control/power_update.hpp"
#include "forgeline/fabric/bus.hpp"
#include "forgeline/fabric/stores.hpp"
#include "forgeline/fabric/tag_server.hpp"
#include "forgeline/pipeline/latency.hpp"

namespace forgeline::pipeline {

struct Alarm {
  std::string kind;  // "tag_write_failed", "heartbeat_latency", "heartbeat_integrity"
  std::string detail;
  std::int64_t time_ns = 0;
};

/// Thread-safe alarm list.
class AlarmLog {
 public:
  void raise(std::string kind, std::string detail, std::int64_t time_ns);
  std::vector<Alarm> all() const;
  std::size_t count(std::string_view kind) const;

 private:
  mutable std::mutex mutex_;
  std::vector<Alarm> alarms_;
};

/// The power update topic a mode listens to.
std::string_view update_topic(Mode mode);

struct UpdaterSettings {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{10};
};

struct UpdaterStats {
  std::uint64_t received = 0;
  std::uint64_t written = 0;
  std::uint64_t ignored = 0;  // came from the inactive mode's topic
  std::uint64_t failed = 0;
  std::uint64_t retries = 0;
  std::uint64_t malformed = 0;
};

/// Applies power updates to the voltage tags, taking only the topic of the
/// active mode, and writes the new voltages through to the forge sensors cache.
class PowerUpdater {
 public:
  enum class Outcome { Written, Ignored, Failed };

  PowerUpdater(std::shared_ptr<fabric::MessageBus> bus, std::shared_ptr<fabric::TagServer> tags,
               fabric::Stores& stores, std::shared_ptr<AlarmLog> alarms, UpdaterSettings settings = {});
  ~PowerUpdater();

  PowerUpdater(const PowerUpdater&) = delete;
  PowerUpdater& operator=(const PowerUpdater&) = delete;

  /// `published_ns` is the update's publish time, the start of the latency sample.
  Outcome handle(const control::PowerUpdate& update, std::string_view topic, std::int64_t published_ns);
  /// Decodes one update message; undecodable ones are counted as malformed.
  void handle(const fabric::Message& message, std::string_view topic);

  void start(std::uint64_t np_offset, std::uint64_t wh_offset);
  void stop();

  UpdaterStats stats() const;
  /// Update publish to voltage tags written.
  std::vector<double> latency_ms() const { return latency_.values(); }
  std::uint64_t processed_np() const { return np_processed_.load(); }
  std::uint64_t processed_wh() const { return wh_processed_.load(); }

 private:
  void run(std::uint64_t np_offset, std::uint64_t wh_offset);

  std::shared_ptr<fabric::MessageBus> bus_;
  std::shared_ptr<fabric::TagServer> tags_;
  fabric::Stores& stores_;
  std::shared_ptr<AlarmLog> alarms_;
  UpdaterSettings settings_;
  mutable std::mutex stats_mutex_;
  UpdaterStats stats_;
  LatencySamples latency_;
  std::atomic<bool> running_{false};
  std::atomic<std::uint64_t> np_processed_{0};
  std::atomic<std::uint64_t> wh_processed_{0};
  std::thread worker_;
};

/// Periodically copies mode, voltages and material from the tags into the
/// forge sensors store. Failed reads keep the old values and mark them stale.
class ForgeDataRetriever {
 public:
  ForgeDataRetriever(std::shared_ptr<fabric::TagServer> tags, fabric::Stores& stores,
                     std::shared_ptr<const Clock> clock, std::chrono::milliseconds period);
  ~ForgeDataRetriever();

  ForgeDataRetriever(const ForgeDataRetriever&) = delete;
  ForgeDataRetriever& operator=(const ForgeDataRetriever&) = delete;

  bool refresh_once();
  void start();
  void stop();

  std::uint64_t refreshes() const { return refreshes_.load(); }
  std::uint64_t failures() const { return failures_.load(); }

 private:
  std::shared_ptr<fabric::TagServer> tags_;
  fabric::Stores& stores_;
  std::shared_ptr<const Clock> clock_;
  std::chrono::milliseconds period_;
  std::atomic<std::uint64_t> refreshes_{0};
  std::atomic<std::uint64_t> failures_{0};
  std::mutex wake_mutex_;
  std::condition_variable wake_;
  bool running_ = false;
  std::thread worker_;
};

inline constexpr std::string_view kHeartbeatTag = "HEARTBEAT";

struct HeartbeatSettings {
  std::string tag = std::string(kHeartbeatTag);
  std::chrono::milliseconds period{200};
  double bound_ms = 100.0;
  int consecutive = 3;
};

/// Heartbeat on one tag: write a nonce, read it back, time the round trip.
class ConnectionCheck {
 public:
  ConnectionCheck(std::shared_ptr<fabric::TagServer> tags, std::shared_ptr<AlarmLog> alarms,
                  std::shared_ptr<const Clock> clock, HeartbeatSettings settings = {});
  ~ConnectionCheck();

  ConnectionCheck(const ConnectionCheck&) = delete;
  ConnectionCheck& operator=(const ConnectionCheck&) = delete;

  /// One round trip. Returns false if the server was unreachable.
  bool check_once();
  /// Applies the alarm rules to one observed round trip.
  void evaluate(std::int64_t nonce, std::int64_t read_back, double latency_ms);

  void start();
  void stop();

  std::vector<double> latency_ms() const { return latency_.values(); }
  int over_bound_streak() const { return streak_.load(); }

 private:
  std::shared_ptr<fabric::TagServer> tags_;
  std::shared_ptr<AlarmLog> alarms_;
  std::shared_ptr<const Clock> clock_;
  HeartbeatSettings settings_;
  LatencySamples latency_;
  std::atomic<std::int64_t> nonce_{0};
  std::atomic<int> streak_{0};
  std::mutex wake_mutex_;
  std::condition_variable wake_;
  bool running_ = false;
  std::thread worker_;
};

}  // namespace forgeline::pipeline
