#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "forgeline/common/clock.hpp"

namespace forgeline::fabric {

using TagValue = std::variant<std::int64_t, double, bool, std::string>;

enum class TagType { Int, Float, Bool, String };

TagType type_of(const TagValue& value);
std::string_view to_string(TagType type);

struct TagSample {
  TagValue value;
  std::int64_t timestamp_ns = 0;
};

using TagCallback = std::function<void(const std::string& name, const TagSample& sample)>;

/// Strongly typed key-value cells with subscriptions, standing in for the
/// plant's OPC-UA server. A tag takes the type of its first write and keeps it.
/// Writes are serialized; callbacks run on the writer's thread, in write order,
/// and must not write back to the server.
class TagServer {
 public:
  using SubscriptionId = std::uint64_t;

  explicit TagServer(std::shared_ptr<const Clock> clock = std::make_shared<WallClock>());

  TagSample read(std::string_view name) const;
  bool contains(std::string_view name) const;
  std::vector<std::string> names() const;

  void write(const std::string& name, TagValue value);
  /// Type-checks every entry before applying any; the injected delay applies once.
  void write_batch(const std::vector<std::pair<std::string, TagValue>>& values);

  SubscriptionId subscribe(const std::string& name, TagCallback callback);
  SubscriptionId subscribe_all(TagCallback callback);
  void unsubscribe(SubscriptionId id);

  // Fault injection.
  void set_write_delay(std::chrono::microseconds delay) { write_delay_us_ = delay.count(); }
  void set_available(bool available) { available_ = available; }
  void fail_next_writes(int count) { failures_remaining_ = count; }
  bool available() const { return available_; }

  std::uint64_t write_count() const { return writes_; }

  /// {"tags": {name: {"type","value","timestamp_ns"}}}
  nlohmann::json snapshot() const;
  void restore(const nlohmann::json& snapshot);

 private:
  struct Cell {
    TagSample sample;
    TagType type;
  };
  struct Subscriber {
    SubscriptionId id;
    std::string name;  // empty for subscribe_all
    TagCallback callback;
  };

  void check_reachable(bool writing);
  void notify(const std::string& name, const TagSample& sample);

  std::shared_ptr<const Clock> clock_;
  mutable std::shared_mutex cells_mutex_;
  std::map<std::string, Cell, std::less<>> cells_;
  std::mutex write_mutex_;
  std::mutex subscribers_mutex_;
  std::vector<Subscriber> subscribers_;
  SubscriptionId next_id_ = 1;
  std::atomic<std::int64_t> write_delay_us_{0};
  std::atomic<bool> available_{true};
  std::atomic<int> failures_remaining_{0};
  std::atomic<std::uint64_t> writes_{0};
};

}  // namespace forgeline::fabric
