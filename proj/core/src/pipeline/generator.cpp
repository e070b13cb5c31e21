#include "forgeline/pipeline/generator.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <thread>

#include <nlohmann/json.hpp>

#include "forgeline/common/error.hpp"
#include "forgeline/pipeline/parser.hpp"
#include "forgeline/pipeline/records.hpp"

namespace forgeline::pipeline {

namespace {

constexpr std::size_t kPowerTagsBegin = kForgeSensorCount;
constexpr std::size_t kModeIndex = kPowerTagsBegin + kZoneCount;
constexpr std::size_t kMaterialIndex = kModeIndex + 1;
constexpr std::size_t kPositionIndex = kMaterialIndex + 1;
constexpr std::size_t kVelocityIndex = kPositionIndex + 1;

drl::FurnaceEnvConfig plant_config(const GeneratorSettings& s) {
  drl::FurnaceEnvConfig c = s.plant;
  c.sensor_mode = twin::SensorMode::Forge;
  c.episode_steps = std::max(c.episode_steps, static_cast<int>(std::ceil(s.duration_s)) + 10);
  return c;
}

nlohmann::json tag_json(const fabric::TagValue& v) {
  return std::visit([](const auto& x) { return nlohmann::json(x); }, v);
}

}  // namespace

void validate(const GeneratorSettings& s) {
  if (!(s.rate >= 0.0) || !std::isfinite(s.rate)) throw ConfigError("generator rate must be >= 0");
  if (!(s.duration_s >= 0.0) || !std::isfinite(s.duration_s)) throw ConfigError("generator duration must be >= 0");
  if (!(s.malformed_fraction >= 0.0 && s.malformed_fraction <= 1.0)) {
    throw ConfigError("malformed fraction must be in [0, 1]");
  }
  if (s.material_id.empty()) throw ConfigError("material id must not be empty");
}

SyntheticGenerator::SyntheticGenerator(std::shared_ptr<fabric::TagServer> tags,
                                       std::shared_ptr<fabric::MessageBus> bus,
                                       std::shared_ptr<ManualClock> plant_clock, GeneratorSettings settings)
    : tags_(std::move(tags)),
      bus_(std::move(bus)),
      plant_clock_(std::move(plant_clock)),
      settings_((validate(settings), std::move(settings))),
      env_(plant_config(settings_), settings_.seed),
      names_(telemetry_tags()),
      state_(env_.state()) {
  state_.mode = settings_.mode;
  state_.material_id = settings_.material_id;
  readout_ = env_.twin().read_sensors(state_);
}

std::vector<std::string> SyntheticGenerator::telemetry_tags() {
  std::vector<std::string> names;
  for (std::size_t z = 1; z <= kZoneCount; ++z) {
    for (std::size_t i = 1; i <= kForgeSensorsPerZone[z - 1]; ++i) {
      names.push_back(temperature_tag(static_cast<int>(z), static_cast<int>(i)));
    }
  }
  for (std::size_t z = 1; z <= kZoneCount; ++z) names.push_back(power_tag(static_cast<int>(z)));
  names.emplace_back(kModeTag);
  names.emplace_back(kMaterialTag);
  names.emplace_back(kRodPositionTag);
  names.emplace_back(kRodVelocityTag);
  return names;
}

void SyntheticGenerator::initialize() {
  plant_clock_->set(settings_.start_ns - 1);
  std::vector<std::pair<std::string, fabric::TagValue>> batch;
  {
    std::lock_guard lock(state_mutex_);
    for (std::size_t z = 0; z < kZoneCount; ++z) {
      batch.emplace_back(voltage_tag(static_cast<int>(z) + 1), state_.zone_voltages[z]);
    }
  }
  for (std::size_t i = 0; i < names_.size(); ++i) batch.emplace_back(names_[i], value_for(i));
  tags_->write_batch(batch);
}

std::uint64_t SyntheticGenerator::planned_records() const {
  return static_cast<std::uint64_t>(std::floor(settings_.rate * settings_.duration_s + 1e-9));
}

fabric::TagValue SyntheticGenerator::value_for(std::size_t i) const {
  std::lock_guard lock(state_mutex_);
  if (i < kPowerTagsBegin) return readout_.temps[i];
  if (i < kModeIndex) return state_.zone_powers[i - kPowerTagsBegin];
  if (i == kModeIndex) return std::string(to_string(state_.mode));
  if (i == kMaterialIndex) return state_.material_id;
  if (i == kPositionIndex) return state_.rods.empty() ? 0.0 : state_.rods.front().front_position;
  if (i == kVelocityIndex) return env_.twin().config().rod_velocity;
  throw Error("tag index out of range");
}

void SyntheticGenerator::advance_plant() {
  ZoneVector powers{};
  for (std::size_t z = 0; z < kZoneCount; ++z) {
    const auto sample = tags_->read(voltage_tag(static_cast<int>(z) + 1));
    powers[z] = env_.twin().power_for_voltage(std::get<double>(sample.value));
  }
  std::lock_guard lock(state_mutex_);
  env_.twin().set_zone_powers(state_, powers);
  env_.twin().advance(state_);
  readout_ = env_.twin().read_sensors(state_);
  ++plant_seconds_;
}

std::uint64_t SyntheticGenerator::run(const std::atomic<bool>* cancel,
                                      const std::function<void(std::uint64_t, std::int64_t)>& on_record) {
  const std::uint64_t total = planned_records();
  if (total == 0) return 0;
  std::mt19937_64 rng(settings_.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto wall_start = std::chrono::steady_clock::now();
  const double period_ns = 1e9 / settings_.rate;
  std::int64_t current_second = -1;
  std::uint64_t k = 0;
  for (; k < total; ++k) {
    if (cancel && cancel->load()) break;
    const auto offset_ns = static_cast<std::int64_t>(std::llround(static_cast<double>(k) * period_ns));
    if (settings_.paced) {
      std::this_thread::sleep_until(wall_start + std::chrono::nanoseconds(offset_ns));
    }
    const std::int64_t ts = settings_.start_ns + offset_ns;
    const std::int64_t second = offset_ns / kNanosPerSecond;
    if (second != current_second) {
      if (current_second >= 0) advance_plant();
      current_second = second;
    }
    plant_clock_->set(ts);
    const std::size_t tag = static_cast<std::size_t>(k % names_.size());
    if (settings_.malformed_fraction > 0.0 && unit(rng) < settings_.malformed_fraction) {
      bus_->publish(fabric::topics::kTelemetry, raw_payload(names_[tag], "garbled", ts));
      ++malformed_;
    } else {
      tags_->write(names_[tag], value_for(tag));
    }
    ++generated_;
    if (on_record) on_record(k, ts);
  }
  return k;
}

void SyntheticGenerator::set_mode(Mode mode) {
  std::lock_guard lock(state_mutex_);
  state_.mode = mode;
}

void SyntheticGenerator::set_material(std::string material_id) {
  std::lock_guard lock(state_mutex_);
  state_.material_id = std::move(material_id);
}

twin::FurnaceState SyntheticGenerator::plant_state() const {
  std::lock_guard lock(state_mutex_);
  return state_;
}

TagGateway::TagGateway(std::shared_ptr<fabric::TagServer> tags, std::shared_ptr<fabric::MessageBus> bus,
                       const std::vector<std::string>& names)
    : tags_(std::move(tags)), bus_(std::move(bus)) {
  for (const std::string& name : names) {
    subscriptions_.push_back(tags_->subscribe(name, [this](const std::string& tag, const fabric::TagSample& s) {
      bus_->publish(fabric::topics::kTelemetry, raw_payload(tag, tag_json(s.value), s.timestamp_ns));
      ++forwarded_;
    }));
  }
}

TagGateway::~TagGateway() {
  for (auto id : subscriptions_) tags_->unsubscribe(id);
}

}  // namespace forgeline::pipeline
