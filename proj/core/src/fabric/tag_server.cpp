#include "forgeline/fabric/tag_server.hpp"

#include <thread>

#include <nlohmann/json.hpp>

#include "forgeline/common/error.hpp"

namespace forgeline::fabric {

TagType type_of(const TagValue& value) {
  return static_cast<TagType>(value.index());
}

std::string_view to_string(TagType type) {
  switch (type) {
    case TagType::Int: return "int";
    case TagType::Float: return "float";
    case TagType::Bool: return "bool";
    case TagType::String: return "string";
  }
  return "unknown";
}

TagServer::TagServer(std::shared_ptr<const Clock> clock) : clock_(std::move(clock)) {}

void TagServer::check_reachable(bool writing) {
  if (!available_) throw TagUnavailableError("tag server unreachable");
  if (writing) {
    int remaining = failures_remaining_.load();
    while (remaining > 0) {
      if (failures_remaining_.compare_exchange_weak(remaining, remaining - 1)) {
        throw TagUnavailableError("tag write failed (injected fault)");
      }
    }
  }
}

TagSample TagServer::read(std::string_view name) const {
  if (!available_) throw TagUnavailableError("tag server unreachable");
  std::shared_lock lock(cells_mutex_);
  auto it = cells_.find(name);
  if (it == cells_.end()) throw UnknownTagError("unknown tag '" + std::string(name) + "'");
  return it->second.sample;
}

bool TagServer::contains(std::string_view name) const {
  std::shared_lock lock(cells_mutex_);
  return cells_.contains(name);
}

std::vector<std::string> TagServer::names() const {
  std::shared_lock lock(cells_mutex_);
  std::vector<std::string> out;
  for (const auto& [name, _] : cells_) out.push_back(name);
  return out;
}

void TagServer::write(const std::string& name, TagValue value) {
  write_batch({{name, std::move(value)}});
}

void TagServer::write_batch(const std::vector<std::pair<std::string, TagValue>>& values) {
  if (const auto delay = write_delay_us_.load(); delay > 0) {
    std::this_thread::sleep_for(std::chrono::microseconds(delay));
  }
  std::lock_guard write_lock(write_mutex_);
  check_reachable(true);
  std::vector<std::pair<std::string, TagSample>> applied;
  {
    std::unique_lock lock(cells_mutex_);
    for (const auto& [name, value] : values) {
      auto it = cells_.find(name);
      if (it != cells_.end() && it->second.type != type_of(value)) {
        throw TagTypeError("tag '" + name + "' holds " + std::string(to_string(it->second.type)) +
                           ", cannot write " + std::string(to_string(type_of(value))));
      }
    }
    const std::int64_t now = clock_->now_ns();
    for (const auto& [name, value] : values) {
      auto [it, inserted] = cells_.try_emplace(name, Cell{{value, now}, type_of(value)});
      if (!inserted) {
        // Timestamps strictly increase per tag even if the clock stalls.
        const std::int64_t ts = std::max(now, it->second.sample.timestamp_ns + 1);
        it->second.sample = {value, ts};
      }
      applied.emplace_back(name, it->second.sample);
    }
  }
  writes_ += values.size();
  for (const auto& [name, sample] : applied) notify(name, sample);
}

void TagServer::notify(const std::string& name, const TagSample& sample) {
  std::vector<TagCallback> targets;
  {
    std::lock_guard lock(subscribers_mutex_);
    for (const Subscriber& s : subscribers_) {
      if (s.name.empty() || s.name == name) targets.push_back(s.callback);
    }
  }
  for (const auto& cb : targets) cb(name, sample);
}

TagServer::SubscriptionId TagServer::subscribe(const std::string& name, TagCallback callback) {
  if (!contains(name)) throw UnknownTagError("cannot subscribe to unknown tag '" + name + "'");
  std::lock_guard lock(subscribers_mutex_);
  const SubscriptionId id = next_id_++;
  subscribers_.push_back({id, name, std::move(callback)});
  return id;
}

TagServer::SubscriptionId TagServer::subscribe_all(TagCallback callback) {
  std::lock_guard lock(subscribers_mutex_);
  const SubscriptionId id = next_id_++;
  subscribers_.push_back({id, {}, std::move(callback)});
  return id;
}

void TagServer::unsubscribe(SubscriptionId id) {
  std::lock_guard lock(subscribers_mutex_);
  std::erase_if(subscribers_, [id](const Subscriber& s) { return s.id == id; });
}

nlohmann::json TagServer::snapshot() const {
  nlohmann::json tags = nlohmann::json::object();
  std::shared_lock lock(cells_mutex_);
  for (const auto& [name, cell] : cells_) {
    nlohmann::json value;
    std::visit([&](const auto& v) { value = v; }, cell.sample.value);
    tags[name] = {{"type", to_string(cell.type)}, {"value", value}, {"timestamp_ns", cell.sample.timestamp_ns}};
  }
  return {{"tags", tags}};
}

void TagServer::restore(const nlohmann::json& snapshot) {
  std::unique_lock lock(cells_mutex_);
  cells_.clear();
  for (const auto& [name, entry] : snapshot.at("tags").items()) {
    const auto type = entry.at("type").get<std::string>();
    const auto& v = entry.at("value");
    TagValue value;
    if (type == "int") value = v.get<std::int64_t>();
    else if (type == "float") value = v.get<double>();
    else if (type == "bool") value = v.get<bool>();
    else if (type == "string") value = v.get<std::string>();
    else throw ConfigError("unknown tag type '" + type + "' in snapshot");
    cells_.emplace(name, Cell{{value, entry.at("timestamp_ns").get<std::int64_t>()}, type_of(value)});
  }
}

}  // namespace forgeline::fabric
