#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "forgeline/common/clock.hpp"
#include "forgeline/common/mode.hpp"
#include "forgeline/drl/env.hpp"
#include "forgeline/fabric/bus.hpp"
#include "forgeline/fabric/tag_server.hpp"
#include "forgeline/twin/twin.hpp"

namespace forgeline::pipeline {

struct GeneratorSettings {
  double rate = 200.0;  // records per second
  double duration_s = 60.0;
  std::int64_t start_ns = 0;  // event time of the first record
  bool paced = true;          // follow wall time; otherwise as fast as possible
  std::string material_id = "C45";
  Mode mode = Mode::NormalProduction;
  double malformed_fraction = 0.0;
  std::uint64_t seed = 19;
  drl::FurnaceEnvConfig plant;
};

void validate(const GeneratorSettings& s);

/// Simulated plant behind the tag server. Each event-time second the twin
/// advances with powers taken from the voltage tags; records cycle through the
/// telemetry tags at the configured rate.
class SyntheticGenerator {
 public:
  /// `plant_clock` stamps tag writes; the generator sets it to each record's event time.
  SyntheticGenerator(std::shared_ptr<fabric::TagServer> tags, std::shared_ptr<fabric::MessageBus> bus,
                     std::shared_ptr<ManualClock> plant_clock, GeneratorSettings settings);

  /// 18 temperatures, 5 powers, mode, material, rod position and velocity.
  static std::vector<std::string> telemetry_tags();

  /// Creates every tag, the voltage tags included, from the warmed plant state.
  void initialize();

  std::uint64_t planned_records() const;

  /// Emits records until done or `cancel` is set. `on_record` runs after each
  /// record with its index and event time.
  std::uint64_t run(const std::atomic<bool>* cancel = nullptr,
                    const std::function<void(std::uint64_t, std::int64_t)>& on_record = {});

  void set_mode(Mode mode);
  void set_material(std::string material_id);

  std::uint64_t generated() const { return generated_.load(); }
  std::uint64_t malformed() const { return malformed_.load(); }
  std::uint64_t plant_seconds() const { return plant_seconds_.load(); }
  twin::FurnaceState plant_state() const;

 private:
  void advance_plant();
  fabric::TagValue value_for(std::size_t tag_index) const;

  std::shared_ptr<fabric::TagServer> tags_;
  std::shared_ptr<fabric::MessageBus> bus_;
  std::shared_ptr<ManualClock> plant_clock_;
  GeneratorSettings settings_;
  drl::FurnaceEnv env_;
  std::vector<std::string> names_;
  mutable std::mutex state_mutex_;
  twin::FurnaceState state_;
  twin::SensorReadout readout_;
  std::atomic<std::uint64_t> generated_{0};
  std::atomic<std::uint64_t> malformed_{0};
  std::atomic<std::uint64_t> plant_seconds_{0};
};

/// Forwards telemetry tag changes to the raw "telemetry" topic.
class TagGateway {
 public:
  TagGateway(std::shared_ptr<fabric::TagServer> tags, std::shared_ptr<fabric::MessageBus> bus,
             const std::vector<std::string>& names);
  ~TagGateway();

  TagGateway(const TagGateway&) = delete;
  TagGateway& operator=(const TagGateway&) = delete;

  std::uint64_t forwarded() const { return forwarded_.load(); }

 private:
  std::shared_ptr<fabric::TagServer> tags_;
  std::shared_ptr<fabric::MessageBus> bus_;
  std::vector<fabric::TagServer::SubscriptionId> subscriptions_;
  std::atomic<std::uint64_t> forwarded_{0};
};

}  // namespace forgeline::pipeline
