#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "forgeline/common/clock.hpp"

namespace forgeline::fabric {

namespace topics {
inline constexpr std::string_view kTelemetry = "telemetry";
inline constexpr std::string_view kReformattedTelemetry = "reformatted_telemetry";
inline constexpr std::string_view kStateSnapshots = "state_snapshots";
inline constexpr std::string_view kNpPowerUpdates = "np_power_updates";
inline constexpr std::string_view kWhPowerUpdates = "wh_power_updates";
}  // namespace topics

inline constexpr std::size_t kDefaultRetention = 100'000;

struct Message {
  std::uint64_t offset = 0;
  std::int64_t timestamp_ns = 0;
  std::string payload;
};

namespace detail {

struct TopicLog {
  std::string name;
  std::size_t retention = kDefaultRetention;
  mutable std::mutex mutex;
  std::condition_variable cv;
  std::deque<Message> messages;  // offsets [base, next)
  std::uint64_t base = 0;
  std::uint64_t next = 0;
  bool closed = false;
};

}  // namespace detail

/// Cursor over one topic. Delivers every retained message from its start
/// offset, then live messages, each exactly once and in offset order.
class Subscription {
 public:
  Subscription() = default;

  /// Blocks up to `timeout` for the next message. Returns nullopt on timeout or
  /// once the bus is shut down and drained. Throws TruncationError when the
  /// cursor fell behind retention.
  std::optional<Message> poll(std::chrono::milliseconds timeout);
  std::optional<Message> try_next() { return poll(std::chrono::milliseconds(0)); }

  std::uint64_t next_offset() const { return next_; }
  const std::string& topic() const;
  bool closed() const;

 private:
  friend class MessageBus;
  Subscription(std::shared_ptr<detail::TopicLog> log, std::uint64_t from)
      : log_(std::move(log)), next_(from) {}

  std::shared_ptr<detail::TopicLog> log_;
  std::uint64_t next_ = 0;
};

/// In-process publish/subscribe broker with named, retained, replayable topics.
/// Safe for concurrent publishers and subscribers.
class MessageBus {
 public:
  explicit MessageBus(std::shared_ptr<const Clock> clock = std::make_shared<WallClock>());

  /// Bus pre-populated with the five pipeline topics.
  static std::shared_ptr<MessageBus> with_canonical_topics(
      std::size_t retention = kDefaultRetention,
      std::shared_ptr<const Clock> clock = std::make_shared<WallClock>());

  void create_topic(std::string_view name, std::size_t retention = kDefaultRetention);
  bool has_topic(std::string_view name) const;
  std::vector<std::string> topic_names() const;

  /// Appends to the topic and wakes subscribers. Throws RoutingError for unknown topics.
  std::uint64_t publish(std::string_view topic, std::string payload);

  /// Throws TruncationError if `from_offset` was evicted, ConfigError if it is in the future.
  Subscription subscribe(std::string_view topic, std::uint64_t from_offset = 0);
  /// Live-only subscription starting at the next offset.
  Subscription subscribe_latest(std::string_view topic);

  std::uint64_t next_offset(std::string_view topic) const;
  std::uint64_t earliest_offset(std::string_view topic) const;
  std::vector<Message> read(std::string_view topic, std::uint64_t from_offset,
                            std::size_t max_count = SIZE_MAX) const;

  /// Newline-delimited JSON: {"offset","timestamp_ns","payload"} per line.
  void dump(std::string_view topic, std::ostream& out) const;
  /// Appends dumped messages to an empty topic, keeping their offsets.
  std::size_t load(std::string_view topic, std::istream& in);

  const std::shared_ptr<const Clock>& clock() const { return clock_; }

  /// Wakes blocked subscribers; later polls return nullopt once drained.
  void shutdown();

 private:
  std::shared_ptr<detail::TopicLog> find(std::string_view topic) const;

  std::shared_ptr<const Clock> clock_;
  mutable std::shared_mutex topics_mutex_;
  std::map<std::string, std::shared_ptr<detail::TopicLog>, std::less<>> topics_;
};

}  // namespace forgeline::fabric
