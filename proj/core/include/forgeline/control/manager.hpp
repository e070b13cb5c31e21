#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "forgeline/common/clock.hpp"
#include "forgeline/control/power_update.hpp"
#include "forgeline/control/wrapper.hpp"
#include "forgeline/fabric/bus.hpp"
#include "forgeline/fabric/stores.hpp"
#include "forgeline/pipeline/records.hpp"

namespace forgeline::control {

inline constexpr std::string_view kDrlManager = "drl";
inline constexpr std::string_view kRuleManager = "rule";
inline constexpr std::string_view kBuiltinVersion = "builtin";

/// Warmholding stub: per zone, raise power below the band, lower it above,
/// otherwise hold. Scores are one-hot.
class RuleBasedModel final : public DecisionModel {
 public:
  explicit RuleBasedModel(std::array<twin::TempBand, kZoneCount> bands = twin::default_zone_temp_bands());
  Scores forward(const Features& x) const override;
  std::array<bool, kZoneCount> controlled_zones() const override;

 private:
  std::array<twin::TempBand, kZoneCount> bands_;
};

/// A model bound to the manager and version that produced it.
struct LoadedAlgorithm {
  std::string manager_id;
  std::string version;
  std::shared_ptr<const DecisionModel> model;
};

/// Holder for the active algorithm of one mode. Readers take a reference-counted
/// copy, so a swap never disturbs a decision already in flight.
class AlgorithmSlot {
 public:
  std::shared_ptr<const LoadedAlgorithm> current() const;
  void store(std::shared_ptr<const LoadedAlgorithm> algorithm);

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const LoadedAlgorithm> current_;
};

struct ControlSettings {
  std::int64_t staleness_ns = 5 * kNanosPerSecond;
  double power_action_step = 5.0;
  std::pair<double, double> power_bounds{10.0, 600.0};
  SanityLimits limits;
};

struct ControlEvent {
  std::string kind;  // staleness, missing_voltages, incomplete_features, undefined_ratio, sanity_reject, no_algorithm
  std::string detail;
  std::uint64_t snapshot_seq = 0;
};

struct DecisionOutcome {
  std::optional<PowerUpdate> update;  // set only when the sanity check passed
  std::optional<SanityResult> sanity;
  std::vector<ControlEvent> events;
};

/// One manager decision: model scores -> actions -> powers -> voltages via the
/// square-root rule -> sanity check.
DecisionOutcome decide_update(const pipeline::StateSnapshot& snapshot, Mode mode, const LoadedAlgorithm& algorithm,
                              const fabric::ForgeSensorsState& cached, const ControlSettings& settings,
                              std::int64_t now_ns);

struct ControlStats {
  std::uint64_t snapshots = 0;
  std::uint64_t published = 0;
  std::uint64_t rejected = 0;
  std::uint64_t skipped = 0;  // stale, missing inputs or no algorithm
  std::map<std::string, std::uint64_t> per_version;  // published updates by version
};

/// The power control macroservice: one manager slot per mode, fed by the
/// snapshot topic, publishing to the per-mode power update topics.
class PowerControlService {
 public:
  PowerControlService(std::shared_ptr<fabric::MessageBus> bus, fabric::Stores& stores,
                      std::shared_ptr<const Clock> clock, ControlSettings settings = {});
  ~PowerControlService();

  PowerControlService(const PowerControlService&) = delete;
  PowerControlService& operator=(const PowerControlService&) = delete;

  /// Loads the selections recorded in the power config store.
  void load_active();

  /// Activates a stored version for one mode. Unknown versions are rejected and
  /// leave the active one untouched.
  void hot_swap(Mode mode, const fabric::ManagerSelection& selection);

  std::shared_ptr<const LoadedAlgorithm> active(Mode mode) const;

  /// Decides on one snapshot and publishes the update if it passes the checks.
  DecisionOutcome process(const pipeline::StateSnapshot& snapshot, std::int64_t snapshot_published_ns);

  /// Background consumer of the snapshot topic starting at `from_offset`.
  void start(std::uint64_t from_offset);
  void stop();

  ControlStats stats() const;
  std::vector<ControlEvent> events() const;
  /// Snapshot publish to decision completion, one sample per processed snapshot.
  std::vector<double> latency_ms() const;
  std::uint64_t processed_offset() const { return processed_.load(); }

 private:
  std::shared_ptr<const LoadedAlgorithm> load(const fabric::ManagerSelection& selection) const;
  AlgorithmSlot& slot(Mode mode);
  const AlgorithmSlot& slot(Mode mode) const;
  void run(std::uint64_t from_offset);

  std::shared_ptr<fabric::MessageBus> bus_;
  fabric::Stores& stores_;
  std::shared_ptr<const Clock> clock_;
  ControlSettings settings_;
  AlgorithmSlot np_slot_;
  AlgorithmSlot wh_slot_;
  std::mutex swap_mutex_;

  mutable std::mutex stats_mutex_;
  ControlStats stats_;
  std::vector<ControlEvent> events_;
  std::vector<double> latency_ms_;

  std::atomic<bool> running_{false};
  std::atomic<std::uint64_t> processed_{0};
  std::thread worker_;
};

}  // namespace forgeline::control
