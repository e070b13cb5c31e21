#include "forgeline/pipeline/snapshot.hpp"

#include "forgeline/common/error.hpp"

#include <nlohmann/json.hpp>

namespace forgeline::pipeline {

std::int64_t snapshot_second(std::int64_t ts_ns) {
  std::int64_t q = ts_ns / kNanosPerSecond;
  if (ts_ns % kNanosPerSecond < 0) --q;
  return q * kNanosPerSecond;
}

namespace {

template <typename T>
struct Latest {
  std::optional<T> value;
  std::int64_t ts = 0;

  void offer(const T& v, std::int64_t t) {
    if (!value || t >= ts) {
      value = v;
      ts = t;
    }
  }
};

}  // namespace

StateSnapshot build_snapshot(std::int64_t second_ns, const std::vector<TelemetryRecord>& records) {
  std::array<Latest<double>, kForgeSensorCount> temps;
  std::array<Latest<double>, kZoneCount> powers;
  std::array<Latest<double>, kZoneCount> voltages;
  Latest<std::string> mode;
  Latest<std::string> material;
  Latest<double> position;

  for (const TelemetryRecord& r : records) {
    if (snapshot_second(r.timestamp_ns) != second_ns) continue;
    const int idx = r.sensor_index.value_or(-1);
    switch (r.kind) {
      case TelemetryKind::Temperature:
        if (idx >= 0 && idx < static_cast<int>(kForgeSensorCount)) temps[idx].offer(r.value, r.timestamp_ns);
        break;
      case TelemetryKind::Power:
        if (idx >= 0 && idx < static_cast<int>(kZoneCount)) powers[idx].offer(r.value, r.timestamp_ns);
        break;
      case TelemetryKind::Voltage:
        if (idx >= 0 && idx < static_cast<int>(kZoneCount)) voltages[idx].offer(r.value, r.timestamp_ns);
        break;
      case TelemetryKind::Mode: mode.offer(r.text, r.timestamp_ns); break;
      case TelemetryKind::Material: material.offer(r.text, r.timestamp_ns); break;
      case TelemetryKind::Position: position.offer(r.value, r.timestamp_ns); break;
      case TelemetryKind::Velocity: break;
    }
  }

  StateSnapshot s;
  s.snapshot_time_ns = second_ns;
  std::size_t present = 0;
  for (std::size_t i = 0; i < kForgeSensorCount; ++i) {
    s.temps[i] = temps[i].value;
    if (s.temps[i]) {
      ++present;
    } else {
      const auto [zone, local] = forge_sensor_zone(i);
      s.missing.push_back(temperature_tag(static_cast<int>(zone), static_cast<int>(local) + 1));
    }
  }
  for (std::size_t z = 0; z < kZoneCount; ++z) {
    s.powers[z] = powers[z].value;
    s.voltages[z] = voltages[z].value;
    if (s.powers[z]) {
      ++present;
    } else {
      s.missing.push_back(power_tag(static_cast<int>(z) + 1));
    }
  }
  if (mode.value) {
    s.mode = mode_from_string(*mode.value);
    ++present;
  } else {
    s.missing.emplace_back(kModeTag);
  }
  if (material.value) {
    s.material_id = material.value;
    ++present;
  } else {
    s.missing.emplace_back(kMaterialTag);
  }
  s.rod_front_m = position.value;
  s.completeness = static_cast<double>(present) / static_cast<double>(kExpectedSnapshotFields);
  return s;
}

SnapshotBuilder::SnapshotBuilder(std::shared_ptr<fabric::MessageBus> bus, fabric::Stores& stores,
                                 SnapshotSettings settings)
    : bus_(std::move(bus)), stores_(stores), settings_(settings) {
  if (!(settings_.completeness_threshold >= 0.0 && settings_.completeness_threshold <= 1.0)) {
    throw ConfigError("completeness threshold must be in [0, 1]");
  }
  if (settings_.grace_ns < 0) throw ConfigError("snapshot grace must be >= 0");
}

SnapshotBuilder::~SnapshotBuilder() { stop(); }

void SnapshotBuilder::add(const TelemetryRecord& record) {
  std::lock_guard lock(mutex_);
  ++stats_.records;
  if (settings_.store_records) {
    stores_.telemetry.append("record", record.timestamp_ns, nlohmann::json(record));
  }
  const std::int64_t second = snapshot_second(record.timestamp_ns);
  if (last_closed_ && second <= *last_closed_) {
    ++stats_.late_records;
    stores_.telemetry.append("late_record", record.timestamp_ns, nlohmann::json(record));
    return;
  }
  while (!open_.empty() && open_.begin()->first < second) {
    auto node = open_.extract(open_.begin());
    close_window(node.key(), std::move(node.mapped()));
  }
  open_[second].push_back(record);
}

void SnapshotBuilder::close_expired(std::int64_t now_ns) {
  std::lock_guard lock(mutex_);
  while (!open_.empty() && open_.begin()->first + kNanosPerSecond + settings_.grace_ns <= now_ns) {
    auto node = open_.extract(open_.begin());
    close_window(node.key(), std::move(node.mapped()));
  }
}

void SnapshotBuilder::flush() {
  std::lock_guard lock(mutex_);
  while (!open_.empty()) {
    auto node = open_.extract(open_.begin());
    close_window(node.key(), std::move(node.mapped()));
  }
}

void SnapshotBuilder::close_window(std::int64_t second_ns, std::vector<TelemetryRecord> records) {
  ++stats_.windows;
  last_closed_ = second_ns;
  StateSnapshot s = build_snapshot(second_ns, records);

  if (s.material_id) {
    if (last_material_ && *last_material_ != *s.material_id) {
      ++stats_.production_changes;
      stores_.telemetry.append("production_change", second_ns,
                               {{"from", *last_material_}, {"to", *s.material_id}, {"snapshot_time_ns", second_ns}});
    }
    last_material_ = s.material_id;
  }

  if (s.completeness + 1e-12 < settings_.completeness_threshold) {
    ++stats_.incomplete;
    stores_.telemetry.append("incomplete_snapshot", second_ns,
                             {{"snapshot_time_ns", second_ns},
                              {"completeness", s.completeness},
                              {"missing", s.missing},
                              {"records", records.size()}});
    return;
  }
  s.seq = next_seq_++;
  s.published_ns = bus_->clock()->now_ns();
  const nlohmann::json j = s;
  stores_.telemetry.append("snapshot", second_ns, j);
  bus_->publish(fabric::topics::kStateSnapshots, j.dump());
  ++stats_.published;
}

void SnapshotBuilder::start(std::uint64_t from_offset) {
  if (running_.exchange(true)) return;
  processed_ = from_offset;
  worker_ = std::thread([this, from_offset] { run(from_offset); });
}

void SnapshotBuilder::stop() {
  running_ = false;
  if (worker_.joinable()) worker_.join();
}

void SnapshotBuilder::run(std::uint64_t from_offset) {
  fabric::Subscription sub = bus_->subscribe(fabric::topics::kReformattedTelemetry, from_offset);
  while (true) {
    auto msg = sub.poll(std::chrono::milliseconds(20));
    if (!msg) {
      if (!running_ || sub.closed()) break;
      close_expired(bus_->clock()->now_ns());
      continue;
    }
    add(nlohmann::json::parse(msg->payload).get<TelemetryRecord>());
    processed_ = msg->offset + 1;
  }
}

SnapshotStats SnapshotBuilder::stats() const {
  std::lock_guard lock(mutex_);
  return stats_;
}

}  // namespace forgeline::pipeline
