#include "forgeline/fabric/bus.hpp"

#include <nlohmann/json.hpp>

#include "forgeline/common/error.hpp"

namespace forgeline::fabric {

std::optional<Message> Subscription::poll(std::chrono::milliseconds timeout) {
  if (!log_) return std::nullopt;
  std::unique_lock lock(log_->mutex);
  auto ready = [&] { return next_ < log_->next || log_->closed; };
  if (!ready() && timeout.count() > 0) log_->cv.wait_for(lock, timeout, ready);
  if (next_ < log_->base) throw TruncationError(log_->name, next_, log_->base);
  if (next_ >= log_->next) return std::nullopt;
  Message msg = log_->messages[static_cast<std::size_t>(next_ - log_->base)];
  ++next_;
  return msg;
}

const std::string& Subscription::topic() const {
  static const std::string empty;
  return log_ ? log_->name : empty;
}

bool Subscription::closed() const {
  if (!log_) return true;
  std::lock_guard lock(log_->mutex);
  return log_->closed && next_ >= log_->next;
}

MessageBus::MessageBus(std::shared_ptr<const Clock> clock) : clock_(std::move(clock)) {}

std::shared_ptr<MessageBus> MessageBus::with_canonical_topics(std::size_t retention,
                                                              std::shared_ptr<const Clock> clock) {
  auto bus = std::make_shared<MessageBus>(std::move(clock));
  for (auto name : {topics::kTelemetry, topics::kReformattedTelemetry, topics::kStateSnapshots,
                    topics::kNpPowerUpdates, topics::kWhPowerUpdates}) {
    bus->create_topic(name, retention);
  }
  return bus;
}

void MessageBus::create_topic(std::string_view name, std::size_t retention) {
  if (retention < 1) throw ConfigError("topic retention must be >= 1");
  std::unique_lock lock(topics_mutex_);
  if (topics_.contains(name)) throw ConfigError("topic '" + std::string(name) + "' already exists");
  auto log = std::make_shared<detail::TopicLog>();
  log->name = std::string(name);
  log->retention = retention;
  topics_.emplace(std::string(name), std::move(log));
}

bool MessageBus::has_topic(std::string_view name) const {
  std::shared_lock lock(topics_mutex_);
  return topics_.contains(name);
}

std::vector<std::string> MessageBus::topic_names() const {
  std::shared_lock lock(topics_mutex_);
  std::vector<std::string> names;
  for (const auto& [name, _] : topics_) names.push_back(name);
  return names;
}

std::shared_ptr<detail::TopicLog> MessageBus::find(std::string_view topic) const {
  std::shared_lock lock(topics_mutex_);
  auto it = topics_.find(topic);
  if (it == topics_.end()) throw RoutingError("unknown topic '" + std::string(topic) + "'");
  return it->second;
}

std::uint64_t MessageBus::publish(std::string_view topic, std::string payload) {
  auto log = find(topic);
  std::uint64_t offset = 0;
  {
    std::lock_guard lock(log->mutex);
    offset = log->next++;
    log->messages.push_back({offset, clock_->now_ns(), std::move(payload)});
    while (log->messages.size() > log->retention) {
      log->messages.pop_front();
      ++log->base;
    }
  }
  log->cv.notify_all();
  return offset;
}

Subscription MessageBus::subscribe(std::string_view topic, std::uint64_t from_offset) {
  auto log = find(topic);
  std::lock_guard lock(log->mutex);
  if (from_offset < log->base) throw TruncationError(log->name, from_offset, log->base);
  if (from_offset > log->next) {
    throw ConfigError("subscription offset " + std::to_string(from_offset) + " is beyond the end of '" +
                      log->name + "'");
  }
  return Subscription(log, from_offset);
}

Subscription MessageBus::subscribe_latest(std::string_view topic) {
  auto log = find(topic);
  std::lock_guard lock(log->mutex);
  return Subscription(log, log->next);
}

std::uint64_t MessageBus::next_offset(std::string_view topic) const {
  auto log = find(topic);
  std::lock_guard lock(log->mutex);
  return log->next;
}

std::uint64_t MessageBus::earliest_offset(std::string_view topic) const {
  auto log = find(topic);
  std::lock_guard lock(log->mutex);
  return log->base;
}

std::vector<Message> MessageBus::read(std::string_view topic, std::uint64_t from_offset,
                                      std::size_t max_count) const {
  auto log = find(topic);
  std::lock_guard lock(log->mutex);
  if (from_offset < log->base) throw TruncationError(log->name, from_offset, log->base);
  std::vector<Message> out;
  for (std::uint64_t o = from_offset; o < log->next && out.size() < max_count; ++o) {
    out.push_back(log->messages[static_cast<std::size_t>(o - log->base)]);
  }
  return out;
}

void MessageBus::dump(std::string_view topic, std::ostream& out) const {
  for (const Message& m : read(topic, earliest_offset(topic))) {
    out << nlohmann::json{{"offset", m.offset}, {"timestamp_ns", m.timestamp_ns}, {"payload", m.payload}}.dump()
        << '\n';
  }
}

std::size_t MessageBus::load(std::string_view topic, std::istream& in) {
  auto log = find(topic);
  std::vector<Message> loaded;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      loaded.push_back({j.at("offset").get<std::uint64_t>(), j.at("timestamp_ns").get<std::int64_t>(),
                        j.at("payload").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("malformed topic dump line: ") + e.what());
    }
  }
  for (std::size_t i = 1; i < loaded.size(); ++i) {
    if (loaded[i].offset != loaded[i - 1].offset + 1) throw ConfigError("topic dump offsets are not dense");
  }
  {
    std::lock_guard lock(log->mutex);
    if (log->next != 0) throw ConfigError("can only load into an empty topic");
    if (!loaded.empty()) {
      log->base = loaded.front().offset;
      log->next = loaded.back().offset + 1;
      for (Message& m : loaded) log->messages.push_back(std::move(m));
      while (log->messages.size() > log->retention) {
        log->messages.pop_front();
        ++log->base;
      }
    }
  }
  log->cv.notify_all();
  return loaded.size();
}

void MessageBus::shutdown() {
  std::vector<std::shared_ptr<detail::TopicLog>> logs;
  {
    std::shared_lock lock(topics_mutex_);
    for (const auto& [_, log] : topics_) logs.push_back(log);
  }
  for (auto& log : logs) {
    {
      std::lock_guard lock(log->mutex);
      log->closed = true;
    }
    log->cv.notify_all();
  }
}

}  // namespace forgeline::fabric
