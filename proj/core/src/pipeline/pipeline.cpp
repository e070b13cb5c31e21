#include "forgeline/pipeline/pipeline.hpp"

#include <algorithm>
#include <thread>

#include <nlohmann/json.hpp>

#include "forgeline/common/error.hpp"
#include "forgeline/pipeline/parser.hpp"

namespace forgeline::pipeline {

void validate(const PipelineOptions& o) {
  validate(o.generator);
  if (!(o.completeness_threshold >= 0.0 && o.completeness_threshold <= 1.0)) {
    throw ConfigError("completeness threshold must be in [0, 1]");
  }
  if (o.tag_write_delay.count() < 0) throw ConfigError("tag write delay must be >= 0");
  if (o.retriever_period.count() <= 0) throw ConfigError("retriever period must be > 0");
  if (o.max_backlog == 0) throw ConfigError("max backlog must be > 0");
  if (o.swap && !(o.swap->at_s >= 0.0)) throw ConfigError("swap time must be >= 0");
}

bool PipelineReport::records_conserved() const {
  return generated == parser_in && parser_in == reformatted + dead_lettered &&
         generated == forwarded + malformed_injected;
}

bool PipelineReport::snapshots_conserved() const {
  return snapshots.windows == snapshots.published + snapshots.incomplete && control.snapshots == snapshots.published;
}

bool PipelineReport::passed() const {
  return !failure && records_conserved() && snapshots_conserved() &&
         std::all_of(latency.begin(), latency.end(), [](const LatencyReport& r) { return r.pass; });
}

double PipelineReport::snapshot_rate() const {
  return event_seconds > 0.0 ? static_cast<double>(snapshots.published) / event_seconds : 0.0;
}

double PipelineReport::update_rate() const {
  return event_seconds > 0.0 ? static_cast<double>(updater.written) / event_seconds : 0.0;
}

void to_json(nlohmann::json& j, const PipelineReport& r) {
  nlohmann::json alarms = nlohmann::json::array();
  for (const Alarm& a : r.alarms) alarms.push_back({{"kind", a.kind}, {"detail", a.detail}, {"time_ns", a.time_ns}});
  nlohmann::json updates = nlohmann::json::array();
  for (const UpdateTrace& u : r.updates) {
    updates.push_back({{"snapshot_seq", u.snapshot_seq},
                       {"manager_id", u.manager_id},
                       {"version", u.version},
                       {"decided_ns", u.decided_ns},
                       {"topic", u.topic}});
  }
  j = {{"records",
        {{"generated", r.generated},
         {"malformed_injected", r.malformed_injected},
         {"forwarded", r.forwarded},
         {"parser_in", r.parser_in},
         {"reformatted", r.reformatted},
         {"dead_lettered", r.dead_lettered},
         {"conserved", r.records_conserved()}}},
       {"snapshots",
        {{"records", r.snapshots.records},
         {"late_records", r.snapshots.late_records},
         {"windows", r.snapshots.windows},
         {"published", r.snapshots.published},
         {"incomplete", r.snapshots.incomplete},
         {"production_changes", r.snapshots.production_changes},
         {"conserved", r.snapshots_conserved()},
         {"per_second", r.snapshot_rate()}}},
       {"control",
        {{"snapshots", r.control.snapshots},
         {"published", r.control.published},
         {"rejected", r.control.rejected},
         {"skipped", r.control.skipped},
         {"per_version", r.control.per_version},
         {"events", r.control_events}}},
       {"data_manager",
        {{"received", r.updater.received},
         {"written", r.updater.written},
         {"ignored", r.updater.ignored},
         {"failed", r.updater.failed},
         {"retries", r.updater.retries},
         {"malformed", r.updater.malformed},
         {"retriever_refreshes", r.retriever_refreshes},
         {"per_second", r.update_rate()}}},
       {"alarms", alarms},
       {"latency", r.latency},
       {"updates", updates},
       {"max_backlog_seen", r.max_backlog_seen},
       {"wall_seconds", r.wall_seconds},
       {"event_seconds", r.event_seconds}};
  j["failure"] = r.failure ? nlohmann::json(*r.failure) : nlohmann::json(nullptr);
  j["passed"] = r.passed();
  j["swap_done_ns"] = r.swap_done_ns ? nlohmann::json(*r.swap_done_ns) : nlohmann::json(nullptr);
}

namespace {

std::int64_t next_whole_second(std::int64_t ns) { return (ns / kNanosPerSecond + 1) * kNanosPerSecond; }

template <typename Pred>
bool wait_for(Pred done, std::chrono::seconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (!done()) {
    if (std::chrono::steady_clock::now() > deadline) return false;
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  return true;
}

std::vector<UpdateTrace> collect_updates(const fabric::MessageBus& bus) {
  std::vector<UpdateTrace> out;
  for (auto topic : {fabric::topics::kNpPowerUpdates, fabric::topics::kWhPowerUpdates}) {
    for (const fabric::Message& m : bus.read(topic, bus.earliest_offset(topic))) {
      const auto u = nlohmann::json::parse(m.payload).get<control::PowerUpdate>();
      out.push_back({u.provenance.snapshot_seq, u.provenance.manager_id, u.provenance.version, u.decided_ns,
                     std::string(topic)});
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.snapshot_seq < b.snapshot_seq; });
  return out;
}

}  // namespace

PipelineReport run_pipeline(fabric::Stores& stores, const PipelineOptions& options) {
  validate(options);
  const auto wall_start = std::chrono::steady_clock::now();

  GeneratorSettings gen = options.generator;
  gen.paced = !options.virtual_clock;
  if (gen.start_ns == 0) gen.start_ns = options.virtual_clock ? kNanosPerSecond : next_whole_second(WallClock().now_ns());

  auto plant_clock = std::make_shared<ManualClock>(gen.start_ns);
  std::shared_ptr<const Clock> clock =
      options.virtual_clock ? std::static_pointer_cast<const Clock>(plant_clock)
                            : std::static_pointer_cast<const Clock>(std::make_shared<AnchoredClock>(gen.start_ns));

  const std::uint64_t planned = static_cast<std::uint64_t>(std::floor(gen.rate * gen.duration_s + 1e-9));
  const std::size_t retention = std::max<std::size_t>(fabric::kDefaultRetention, planned + 1000);
  auto bus = fabric::MessageBus::with_canonical_topics(retention, clock);
  auto tags = std::make_shared<fabric::TagServer>(plant_clock);
  auto alarms = std::make_shared<AlarmLog>();

  SyntheticGenerator generator(tags, bus, plant_clock, gen);
  generator.initialize();
  stores.forge_sensors.set_mode(gen.mode);
  tags->set_write_delay(options.tag_write_delay);

  TagGateway gateway(tags, bus, SyntheticGenerator::telemetry_tags());
  TelemetryParser parser(bus, options.dead_letter_path);
  SnapshotSettings snap_settings;
  snap_settings.completeness_threshold = options.completeness_threshold;
  SnapshotBuilder builder(bus, stores, snap_settings);
  control::PowerControlService control(bus, stores, clock, options.control);
  control.load_active();
  PowerUpdater updater(bus, tags, stores, alarms, options.updater);
  ForgeDataRetriever retriever(tags, stores, clock, options.retriever_period);
  ConnectionCheck heartbeat(tags, alarms, clock, options.heartbeat);
  retriever.refresh_once();

  PipelineReport report;
  const std::int64_t swap_at_ns =
      options.swap ? gen.start_ns + static_cast<std::int64_t>(options.swap->at_s * 1e9) : 0;
  auto maybe_swap = [&](std::int64_t event_ns) {
    if (options.swap && !report.swap_done_ns && event_ns >= swap_at_ns) {
      control.hot_swap(options.swap->mode, options.swap->selection);
      report.swap_done_ns = clock->now_ns();
    }
  };

  if (options.virtual_clock) {
    std::uint64_t tel = 0, ref = 0, snap = 0, np = 0, wh = 0;
    auto pump = [&] {
      for (const auto& m : bus->read(fabric::topics::kTelemetry, tel)) {
        parser.handle(m);
        tel = m.offset + 1;
      }
      for (const auto& m : bus->read(fabric::topics::kReformattedTelemetry, ref)) {
        builder.add(nlohmann::json::parse(m.payload).get<TelemetryRecord>());
        ref = m.offset + 1;
      }
      for (const auto& m : bus->read(fabric::topics::kStateSnapshots, snap)) {
        control.process(nlohmann::json::parse(m.payload).get<StateSnapshot>(), m.timestamp_ns);
        snap = m.offset + 1;
      }
      for (const auto& m : bus->read(fabric::topics::kNpPowerUpdates, np)) {
        updater.handle(m, fabric::topics::kNpPowerUpdates);
        np = m.offset + 1;
      }
      for (const auto& m : bus->read(fabric::topics::kWhPowerUpdates, wh)) {
        updater.handle(m, fabric::topics::kWhPowerUpdates);
        wh = m.offset + 1;
      }
    };
    std::int64_t last_second = -1;
    generator.run(nullptr, [&](std::uint64_t, std::int64_t ts) {
      const std::int64_t second = (ts - gen.start_ns) / kNanosPerSecond;
      if (second != last_second) {
        last_second = second;
        retriever.refresh_once();
        heartbeat.check_once();
      }
      maybe_swap(ts);
      pump();
    });
    pump();
    builder.flush();
    pump();
  } else {
    parser.start(0);
    builder.start(0);
    control.start(0);
    updater.start(0, 0);
    retriever.start();
    heartbeat.start();

    std::atomic<bool> cancel{false};
    generator.run(&cancel, [&](std::uint64_t k, std::int64_t ts) {
      maybe_swap(ts);
      if (k % 100 == 0) {
        const std::uint64_t backlog = bus->next_offset(fabric::topics::kTelemetry) - parser.processed_offset();
        report.max_backlog_seen = std::max<std::uint64_t>(report.max_backlog_seen, backlog);
        if (backlog > options.max_backlog) {
          report.failure = "parser backlog " + std::to_string(backlog) + " exceeds " +
                         std::to_string(options.max_backlog);
          cancel = true;
        }
      }
    });

    auto caught_up = [&](std::string_view topic, auto offset) {
      return [&bus, topic, offset] { return offset() >= bus->next_offset(topic); };
    };
    bool drained =
        wait_for(caught_up(fabric::topics::kTelemetry, [&] { return parser.processed_offset(); }),
                 options.drain_timeout) &&
        wait_for(caught_up(fabric::topics::kReformattedTelemetry, [&] { return builder.processed_offset(); }),
                 options.drain_timeout);
    builder.flush();
    drained = drained &&
              wait_for(caught_up(fabric::topics::kStateSnapshots, [&] { return control.processed_offset(); }),
                       options.drain_timeout) &&
              wait_for(caught_up(fabric::topics::kNpPowerUpdates, [&] { return updater.processed_np(); }),
                       options.drain_timeout) &&
              wait_for(caught_up(fabric::topics::kWhPowerUpdates, [&] { return updater.processed_wh(); }),
                       options.drain_timeout);

    heartbeat.stop();
    retriever.stop();
    updater.stop();
    control.stop();
    builder.stop();
    parser.stop();
    if (!drained && !report.failure) report.failure = "pipeline stages did not drain within the timeout";
  }

  report.generated = generator.generated();
  report.malformed_injected = generator.malformed();
  report.forwarded = gateway.forwarded();
  report.parser_in = parser.records_in();
  report.reformatted = parser.reformatted();
  report.dead_lettered = parser.dead_lettered();
  report.snapshots = builder.stats();
  report.control = control.stats();
  for (const control::ControlEvent& e : control.events()) ++report.control_events[e.kind];
  report.updater = updater.stats();
  report.retriever_refreshes = retriever.refreshes();
  report.alarms = alarms->all();
  report.latency = {make_report(Stage::TelemetryParser, parser.latency_ms()),
                    make_report(Stage::PowerControl, control.latency_ms()),
                    make_report(Stage::DataManager, updater.latency_ms())};
  report.updates = collect_updates(*bus);
  report.event_seconds = static_cast<double>(planned) / (gen.rate > 0 ? gen.rate : 1.0);
  if (gen.rate <= 0) report.event_seconds = 0.0;
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return report;
}

}  // namespace forgeline::pipeline
