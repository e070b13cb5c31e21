#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "forgeline/control/manager.hpp"
#include "forgeline/fabric/stores.hpp"
#include "forgeline/pipeline/data_manager.hpp"
#include "forgeline/pipeline/generator.hpp"
#include "forgeline/pipeline/latency.hpp"
#include "forgeline/pipeline/snapshot.hpp"

namespace forgeline::pipeline {

/// Activate another algorithm version while the pipeline is running.
struct SwapPlan {
  double at_s = 0.0;  // event-time seconds after the start
  Mode mode = Mode::NormalProduction;
  fabric::ManagerSelection selection;
};

struct PipelineOptions {
  GeneratorSettings generator;
  bool virtual_clock = false;  // single-threaded, deterministic, unpaced
  std::chrono::milliseconds tag_write_delay{0};
  double completeness_threshold = kDefaultCompletenessThreshold;
  control::ControlSettings control;
  UpdaterSettings updater;
  HeartbeatSettings heartbeat;
  std::chrono::milliseconds retriever_period{1000};
  std::optional<std::filesystem::path> dead_letter_path;
  std::optional<SwapPlan> swap;
  std::size_t max_backlog = 50'000;  // unprocessed raw messages before the run is aborted
  std::chrono::seconds drain_timeout{30};
};

void validate(const PipelineOptions& o);

struct UpdateTrace {
  std::uint64_t snapshot_seq = 0;
  std::string manager_id;
  std::string version;
  std::int64_t decided_ns = 0;
  std::string topic;
};

struct PipelineReport {
  std::uint64_t generated = 0;
  std::uint64_t malformed_injected = 0;
  std::uint64_t forwarded = 0;
  std::uint64_t parser_in = 0;
  std::uint64_t reformatted = 0;
  std::uint64_t dead_lettered = 0;
  SnapshotStats snapshots;
  control::ControlStats control;
  std::map<std::string, std::uint64_t> control_events;  // by kind
  UpdaterStats updater;
  std::uint64_t retriever_refreshes = 0;
  std::vector<Alarm> alarms;
  std::vector<LatencyReport> latency;
  std::vector<UpdateTrace> updates;
  std::optional<std::int64_t> swap_done_ns;
  std::uint64_t max_backlog_seen = 0;
  double wall_seconds = 0.0;
  double event_seconds = 0.0;
  std::optional<std::string> failure;  // backlog overrun or stages that never drained


  /// generated = parsed + dead-lettered, with every generated record reaching the parser.
  bool records_conserved() const;
  /// Every closed window was published or logged incomplete, and control saw every published one.
  bool snapshots_conserved() const;
  /// Published snapshots per event-time second.
  double snapshot_rate() const;
  double update_rate() const;
  /// No failure, both conservation identities and every latency verdict.
  bool passed() const;
};

void to_json(nlohmann::json& j, const PipelineReport& r);

/// Runs generator, gateway, parser, snapshot builder, power control and data
/// manager for one synthetic stream, then drains every stage. `stores` supplies
/// the algorithms and active selections.
PipelineReport run_pipeline(fabric::Stores& stores, const PipelineOptions& options);

}  // namespace forgeline::pipeline
