#include "forgeline/pipeline/data_manager.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "forgeline/common/error.hpp"
#include "forgeline/pipeline/records.hpp"

namespace forgeline::pipeline {

void AlarmLog::raise(std::string kind, std::string detail, std::int64_t time_ns) {
  std::lock_guard lock(mutex_);
  alarms_.push_back({std::move(kind), std::move(detail), time_ns});
}

std::vector<Alarm> AlarmLog::all() const {
  std::lock_guard lock(mutex_);
  return alarms_;
}

std::size_t AlarmLog::count(std::string_view kind) const {
  std::lock_guard lock(mutex_);
  return static_cast<std::size_t>(
      std::count_if(alarms_.begin(), alarms_.end(), [&](const Alarm& a) { return a.kind == kind; }));
}

std::string_view update_topic(Mode mode) {
  return mode == Mode::NormalProduction ? fabric::topics::kNpPowerUpdates : fabric::topics::kWhPowerUpdates;
}

PowerUpdater::PowerUpdater(std::shared_ptr<fabric::MessageBus> bus, std::shared_ptr<fabric::TagServer> tags,
                           fabric::Stores& stores, std::shared_ptr<AlarmLog> alarms, UpdaterSettings settings)
    : bus_(std::move(bus)), tags_(std::move(tags)), stores_(stores), alarms_(std::move(alarms)), settings_(settings) {
  if (settings_.max_retries < 0) throw ConfigError("max_retries must be >= 0");
}

PowerUpdater::~PowerUpdater() { stop(); }

PowerUpdater::Outcome PowerUpdater::handle(const control::PowerUpdate& update, std::string_view topic,
                                           std::int64_t published_ns) {
  {
    std::lock_guard lock(stats_mutex_);
    ++stats_.received;
  }
  const fabric::ForgeSensorsState cached = stores_.forge_sensors.get();
  if (topic != update_topic(cached.mode)) {
    std::lock_guard lock(stats_mutex_);
    ++stats_.ignored;
    return Outcome::Ignored;
  }

  std::vector<std::pair<std::string, fabric::TagValue>> batch;
  for (std::size_t z = 0; z < kZoneCount; ++z) {
    batch.emplace_back(voltage_tag(static_cast<int>(z) + 1), update.new_voltages[z]);
  }
  auto backoff = settings_.initial_backoff;
  std::string last_error;
  for (int attempt = 0; attempt <= settings_.max_retries; ++attempt) {
    if (attempt > 0) {
      {
        std::lock_guard lock(stats_mutex_);
        ++stats_.retries;
      }
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    try {
      tags_->write_batch(batch);
    } catch (const TagError& e) {
      last_error = e.what();
      continue;
    }
    const std::int64_t now = bus_->clock()->now_ns();
    stores_.forge_sensors.update(cached.mode, update.new_voltages, cached.material_id, now);
    latency_.add(static_cast<double>(now - published_ns) / 1e6);
    std::lock_guard lock(stats_mutex_);
    ++stats_.written;
    return Outcome::Written;
  }
  alarms_->raise("tag_write_failed",
                 "voltage update from " + update.provenance.version + " not applied after " +
                     std::to_string(settings_.max_retries + 1) + " attempts: " + last_error,
                 bus_->clock()->now_ns());
  std::lock_guard lock(stats_mutex_);
  ++stats_.failed;
  return Outcome::Failed;
}

void PowerUpdater::handle(const fabric::Message& message, std::string_view topic) {
  control::PowerUpdate update;
  try {
    update = nlohmann::json::parse(message.payload).get<control::PowerUpdate>();
  } catch (const std::exception&) {
    std::lock_guard lock(stats_mutex_);
    ++stats_.malformed;
    return;
  }
  handle(update, topic, message.timestamp_ns);
}

void PowerUpdater::start(std::uint64_t np_offset, std::uint64_t wh_offset) {
  if (running_.exchange(true)) return;
  np_processed_ = np_offset;
  wh_processed_ = wh_offset;
  worker_ = std::thread([this, np_offset, wh_offset] { run(np_offset, wh_offset); });
}

void PowerUpdater::stop() {
  running_ = false;
  if (worker_.joinable()) worker_.join();
}

void PowerUpdater::run(std::uint64_t np_offset, std::uint64_t wh_offset) {
  fabric::Subscription np = bus_->subscribe(fabric::topics::kNpPowerUpdates, np_offset);
  fabric::Subscription wh = bus_->subscribe(fabric::topics::kWhPowerUpdates, wh_offset);
  while (true) {
    bool any = false;
    if (auto msg = np.poll(std::chrono::milliseconds(10))) {
      handle(*msg, fabric::topics::kNpPowerUpdates);
      np_processed_ = msg->offset + 1;
      any = true;
    }
    if (auto msg = wh.poll(std::chrono::milliseconds(0))) {
      handle(*msg, fabric::topics::kWhPowerUpdates);
      wh_processed_ = msg->offset + 1;
      any = true;
    }
    if (!any && (!running_ || (np.closed() && wh.closed()))) break;
  }
}

UpdaterStats PowerUpdater::stats() const {
  std::lock_guard lock(stats_mutex_);
  return stats_;
}

ForgeDataRetriever::ForgeDataRetriever(std::shared_ptr<fabric::TagServer> tags, fabric::Stores& stores,
                                       std::shared_ptr<const Clock> clock, std::chrono::milliseconds period)
    : tags_(std::move(tags)), stores_(stores), clock_(std::move(clock)), period_(period) {
  if (period_.count() <= 0) throw ConfigError("retriever period must be > 0");
}

ForgeDataRetriever::~ForgeDataRetriever() { stop(); }

bool ForgeDataRetriever::refresh_once() {
  try {
    const Mode mode = mode_from_string(std::get<std::string>(tags_->read(kModeTag).value));
    ZoneVector voltages{};
    for (std::size_t z = 0; z < kZoneCount; ++z) {
      voltages[z] = std::get<double>(tags_->read(voltage_tag(static_cast<int>(z) + 1)).value);
    }
    std::string material = std::get<std::string>(tags_->read(kMaterialTag).value);
    stores_.forge_sensors.update(mode, voltages, std::move(material), clock_->now_ns());
    ++refreshes_;
    return true;
  } catch (const std::exception&) {
    stores_.forge_sensors.mark_stale();
    ++failures_;
    return false;
  }
}

void ForgeDataRetriever::start() {
  {
    std::lock_guard lock(wake_mutex_);
    if (running_) return;
    running_ = true;
  }
  worker_ = std::thread([this] {
    std::unique_lock lock(wake_mutex_);
    while (running_) {
      lock.unlock();
      refresh_once();
      lock.lock();
      wake_.wait_for(lock, period_, [this] { return !running_; });
    }
  });
}

void ForgeDataRetriever::stop() {
  {
    std::lock_guard lock(wake_mutex_);
    running_ = false;
  }
  wake_.notify_all();
  if (worker_.joinable()) worker_.join();
}

ConnectionCheck::ConnectionCheck(std::shared_ptr<fabric::TagServer> tags, std::shared_ptr<AlarmLog> alarms,
                                 std::shared_ptr<const Clock> clock, HeartbeatSettings settings)
    : tags_(std::move(tags)), alarms_(std::move(alarms)), clock_(std::move(clock)), settings_(std::move(settings)) {
  if (settings_.consecutive < 1) throw ConfigError("heartbeat consecutive count must be >= 1");
  if (!(settings_.bound_ms > 0.0)) throw ConfigError("heartbeat bound must be > 0");
  if (settings_.period.count() <= 0) throw ConfigError("heartbeat period must be > 0");
}

ConnectionCheck::~ConnectionCheck() { stop(); }

bool ConnectionCheck::check_once() {
  const std::int64_t nonce = ++nonce_;
  const auto t0 = std::chrono::steady_clock::now();
  std::int64_t read_back = 0;
  try {
    tags_->write(settings_.tag, nonce);
    read_back = std::get<std::int64_t>(tags_->read(settings_.tag).value);
  } catch (const std::exception&) {
    return false;
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  evaluate(nonce, read_back, ms);
  return true;
}

void ConnectionCheck::evaluate(std::int64_t nonce, std::int64_t read_back, double latency_ms) {
  latency_.add(latency_ms);
  if (read_back != nonce) {
    alarms_->raise("heartbeat_integrity",
                   "wrote " + std::to_string(nonce) + ", read " + std::to_string(read_back), clock_->now_ns());
  }
  if (latency_ms > settings_.bound_ms) {
    if (++streak_ == settings_.consecutive) {
      alarms_->raise("heartbeat_latency",
                     std::to_string(settings_.consecutive) + " round trips over " +
                         std::to_string(settings_.bound_ms) + " ms",
                     clock_->now_ns());
    }
  } else {
    streak_ = 0;
  }
}

void ConnectionCheck::start() {
  {
    std::lock_guard lock(wake_mutex_);
    if (running_) return;
    running_ = true;
  }
  worker_ = std::thread([this] {
    std::unique_lock lock(wake_mutex_);
    while (running_) {
      lock.unlock();
      check_once();
      lock.lock();
      wake_.wait_for(lock, settings_.period, [this] { return !running_; });
    }
  });
}

void ConnectionCheck::stop() {
  {
    std::lock_guard lock(wake_mutex_);
    running_ = false;
  }
  wake_.notify_all();
  if (worker_.joinable()) worker_.join();
}

}  // namespace forgeline::pipeline
