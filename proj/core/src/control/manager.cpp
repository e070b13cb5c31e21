#include "forgeline/control/manager.hpp"

#include <nlohmann/json.hpp>

#include "forgeline/common/error.hpp"
#include "forgeline/control/voltage.hpp"

namespace forgeline::control {

namespace {

constexpr std::size_t kMaxEvents = 100000;

}  // namespace

RuleBasedModel::RuleBasedModel(std::array<twin::TempBand, kZoneCount> bands) : bands_(bands) {}

Scores RuleBasedModel::forward(const Features& x) const {
  Scores out{};
  for (std::size_t z = 0; z < kZoneCount; ++z) {
    const std::size_t first = forge_sensor_offset(z + 1);
    double mean = 0.0;
    for (std::size_t i = 0; i < kForgeSensorsPerZone[z]; ++i) mean += x[first + i];
    mean /= static_cast<double>(kForgeSensorsPerZone[z]);
    std::size_t slot = kNoChange;
    if (mean < bands_[z].min_c) slot = kIncrease;
    if (mean > bands_[z].max_c) slot = kDecrease;
    out[z * kSlotsPerZone + slot] = 1.0;
  }
  return out;
}

std::array<bool, kZoneCount> RuleBasedModel::controlled_zones() const {
  std::array<bool, kZoneCount> all{};
  all.fill(true);
  return all;
}

std::shared_ptr<const LoadedAlgorithm> AlgorithmSlot::current() const {
  std::lock_guard lock(mutex_);
  return current_;
}

void AlgorithmSlot::store(std::shared_ptr<const LoadedAlgorithm> algorithm) {
  std::lock_guard lock(mutex_);
  current_ = std::move(algorithm);
}

DecisionOutcome decide_update(const pipeline::StateSnapshot& snapshot, Mode mode, const LoadedAlgorithm& algorithm,
                              const fabric::ForgeSensorsState& cached, const ControlSettings& settings,
                              std::int64_t now_ns) {
  DecisionOutcome out;
  auto event = [&](std::string kind, std::string detail) {
    out.events.push_back({std::move(kind), std::move(detail), snapshot.seq});
  };
  const std::int64_t age = now_ns - snapshot.snapshot_time_ns;
  if (age > settings.staleness_ns) {
    event("staleness", "snapshot is " + std::to_string(age / 1000000) + " ms old");
    return out;
  }
  if (!cached.valid) {
    event("missing_voltages", "no cached zone voltages yet");
    return out;
  }
  const auto features = snapshot.features();
  if (!features) {
    event("incomplete_features", "snapshot lacks temperatures or powers");
    return out;
  }

  const twin::ZoneActions actions = decide(*algorithm.model, *features);
  ZoneVector p_old{};
  for (std::size_t z = 0; z < kZoneCount; ++z) p_old[z] = (*features)[kForgeSensorCount + z];
  const ZoneVector p_new = apply_actions(p_old, actions, settings.power_action_step, settings.power_bounds);

  PowerUpdate u;
  u.mode = mode;
  u.actions = actions;
  u.old_powers = p_old;
  u.new_powers = p_new;
  u.old_voltages = cached.voltages;
  u.new_voltages = cached.voltages;
  for (std::size_t z = 0; z < kZoneCount; ++z) {
    if (p_new[z] == p_old[z]) continue;
    try {
      u.new_voltages[z] = voltage_for_power_change(cached.voltages[z], p_old[z], p_new[z]);
    } catch (const UndefinedRatioError&) {
      u.undefined_ratio[z] = true;
      event("undefined_ratio", "zone " + std::to_string(z + 1) + " has zero power; no voltage emitted");
    } catch (const ConfigError&) {
      u.new_voltages[z] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  u.provenance = {algorithm.manager_id, algorithm.version, snapshot.snapshot_time_ns, snapshot.seq};
  u.decided_ns = now_ns;

  out.sanity = sanity_check(u, settings.limits);
  if (!out.sanity->accepted) {
    event("sanity_reject", out.sanity->rule + ": " + out.sanity->detail);
    return out;
  }
  out.update = std::move(u);
  return out;
}

PowerControlService::PowerControlService(std::shared_ptr<fabric::MessageBus> bus, fabric::Stores& stores,
                                         std::shared_ptr<const Clock> clock, ControlSettings settings)
    : bus_(std::move(bus)), stores_(stores), clock_(std::move(clock)), settings_(settings) {}

PowerControlService::~PowerControlService() { stop(); }

AlgorithmSlot& PowerControlService::slot(Mode mode) { return mode == Mode::NormalProduction ? np_slot_ : wh_slot_; }
const AlgorithmSlot& PowerControlService::slot(Mode mode) const {
  return mode == Mode::NormalProduction ? np_slot_ : wh_slot_;
}

std::shared_ptr<const LoadedAlgorithm> PowerControlService::load(const fabric::ManagerSelection& sel) const {
  auto loaded = std::make_shared<LoadedAlgorithm>();
  loaded->manager_id = sel.manager_id;
  loaded->version = sel.version;
  if (sel.manager_id == kRuleManager) {
    if (sel.version != kBuiltinVersion) throw NotFoundError("rule manager only offers version 'builtin'");
    loaded->model = std::make_shared<RuleBasedModel>();
  } else if (sel.manager_id == kDrlManager) {
    if (!stores_.algorithms.contains(sel.version)) {
      throw NotFoundError("algorithm version '" + sel.version + "' is not in the algorithm store");
    }
    loaded->model = std::make_shared<WrappedModel>(from_bundle(stores_.algorithms.get(sel.version)));
  } else {
    throw NotFoundError("unknown manager '" + sel.manager_id + "'");
  }
  return loaded;
}

void PowerControlService::load_active() {
  for (Mode mode : {Mode::NormalProduction, Mode::Warmholding}) {
    try {
      slot(mode).store(load(stores_.power_config.get(mode)));
    } catch (const Error& e) {
      std::lock_guard lock(stats_mutex_);
      events_.push_back({"no_algorithm", std::string(to_string(mode)) + ": " + e.what(), 0});
    }
  }
}

void PowerControlService::hot_swap(Mode mode, const fabric::ManagerSelection& selection) {
  std::lock_guard lock(swap_mutex_);
  auto loaded = load(selection);
  slot(mode).store(std::move(loaded));
  stores_.power_config.set(mode, selection);
}

std::shared_ptr<const LoadedAlgorithm> PowerControlService::active(Mode mode) const { return slot(mode).current(); }

DecisionOutcome PowerControlService::process(const pipeline::StateSnapshot& snapshot,
                                             std::int64_t snapshot_published_ns) {
  const fabric::ForgeSensorsState cached = stores_.forge_sensors.get();
  const Mode mode = snapshot.mode.value_or(cached.mode);
  const auto algorithm = slot(mode).current();
  DecisionOutcome out;
  if (!algorithm) {
    out.events.push_back({"no_algorithm", "no active algorithm for " + std::string(to_string(mode)), snapshot.seq});
  } else {
    out = decide_update(snapshot, mode, *algorithm, cached, settings_, clock_->now_ns());
  }
  if (out.update) {
    out.update->decided_ns = clock_->now_ns();
    const auto topic = mode == Mode::NormalProduction ? fabric::topics::kNpPowerUpdates : fabric::topics::kWhPowerUpdates;
    bus_->publish(topic, nlohmann::json(*out.update).dump());
  }
  const double latency = static_cast<double>(clock_->now_ns() - snapshot_published_ns) / 1e6;

  std::lock_guard lock(stats_mutex_);
  ++stats_.snapshots;
  if (out.update) {
    ++stats_.published;
    ++stats_.per_version[out.update->provenance.version];
  } else if (out.sanity && !out.sanity->accepted) {
    ++stats_.rejected;
  } else {
    ++stats_.skipped;
  }
  latency_ms_.push_back(latency);
  for (auto& e : out.events) {
    if (events_.size() < kMaxEvents) events_.push_back(e);
  }
  return out;
}

void PowerControlService::start(std::uint64_t from_offset) {
  if (running_.exchange(true)) return;
  worker_ = std::thread([this, from_offset] { run(from_offset); });
}

void PowerControlService::stop() {
  running_ = false;
  if (worker_.joinable()) worker_.join();
}

void PowerControlService::run(std::uint64_t from_offset) {
  fabric::Subscription sub = bus_->subscribe(fabric::topics::kStateSnapshots, from_offset);
  while (true) {
    auto msg = sub.poll(std::chrono::milliseconds(20));
    if (!msg) {
      if (!running_ || sub.closed()) break;
      continue;
    }
    try {
      const auto snapshot = nlohmann::json::parse(msg->payload).get<pipeline::StateSnapshot>();
      process(snapshot, msg->timestamp_ns);
    } catch (const std::exception& e) {
      std::lock_guard lock(stats_mutex_);
      if (events_.size() < kMaxEvents) events_.push_back({"bad_snapshot", e.what(), 0});
    }
    processed_ = msg->offset + 1;
  }
}

ControlStats PowerControlService::stats() const {
  std::lock_guard lock(stats_mutex_);
  return stats_;
}

std::vector<ControlEvent> PowerControlService::events() const {
  std::lock_guard lock(stats_mutex_);
  return events_;
}

std::vector<double> PowerControlService::latency_ms() const {
  std::lock_guard lock(stats_mutex_);
  return latency_ms_;
}

}  // namespace forgeline::control
