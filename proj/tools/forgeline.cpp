// forgeline command-line front end.
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "forgeline/common/error.hpp"
#include "forgeline/control/manager.hpp"
#include "forgeline/harness/correlate.hpp"
#include "forgeline/harness/deploy.hpp"
#include "forgeline/harness/grid.hpp"
#include "forgeline/harness/job.hpp"
#include "forgeline/harness/series.hpp"
#include "forgeline/harness/simulate.hpp"
#include "forgeline/pipeline/pipeline.hpp"
#include "forgeline/twin/trajectory_io.hpp"

namespace fs = std::filesystem;
using namespace forgeline;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kRuntime = 2;

struct Globals {
  std::optional<fs::path> config;
  std::optional<std::uint64_t> seed;
  fs::path out = ".";
};

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + " is not valid JSON: " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

// ---- simulate

struct SimulateArgs {
  int steps = 100;
  std::string controller = "noop";
};

int cmd_simulate(const Globals& g, const SimulateArgs& a) {
  const nlohmann::json overrides = g.config ? read_json(*g.config) : nlohmann::json::object();
  harness::SimulateOptions opts;
  opts.twin = harness::simulation_twin_config(overrides, a.steps);
  opts.steps = a.steps;
  opts.controller = a.controller;
  const auto result = harness::simulate(opts);
  fs::create_directories(g.out);
  {
    std::ofstream csv(g.out / "trajectory.csv");
    twin::write_trajectory_csv(csv, result.trajectory);
  }
  nlohmann::json summary = result.summary;
  summary["controller"] = a.controller;
  summary["seed"] = g.seed.value_or(0);
  write_json(g.out / "summary.json", summary);
  std::cout << summary.dump(2) << '\n';
  return result.summary.error ? kRuntime : kOk;
}

// ---- train

struct TrainArgs {
  bool grid_mode = false;
};

int cmd_train(const Globals& g, const TrainArgs& a) {
  harness::JobSpec job = g.config ? harness::job_from_json(read_json(*g.config)) : harness::JobSpec{};
  if (g.seed) job.common().seed = *g.seed;
  harness::validate(job, a.grid_mode);
  std::cout << harness::format_config_table(job) << std::flush;
  const auto result = harness::run_job(job, a.grid_mode);
  harness::write_job_outputs(g.out, job, result);
  std::cout << "episodes " << result.episodes.size() << "  best " << result.best_score() << "  final "
            << result.final_score() << "  last10 " << result.tail_mean(10) << '\n';
  if (result.error) {
    std::cerr << "training stopped: " << *result.error << '\n';
    return kRuntime;
  }
  return kOk;
}

// ---- grid

struct GridArgs {
  std::optional<std::size_t> budget;
  std::optional<int> workers;
  bool dry_run = false;
};

int cmd_grid(const Globals& g, const GridArgs& a) {
  if (!g.config) throw ConfigError("grid needs --config <grid.json>");
  harness::GridSpec grid = harness::grid_from_json(read_json(*g.config));
  if (a.budget) grid.budget = *a.budget;
  if (a.workers) grid.workers = *a.workers;
  if (g.seed) grid.sample_seed = *g.seed;
  const auto jobs = harness::expand_grid(grid);
  std::cout << "grid size " << harness::grid_size(grid) << ", running " << jobs.size() << " jobs\n";
  if (a.dry_run) return kOk;
  fs::create_directories(g.out);
  const auto rows = harness::run_grid(grid, g.out / "jobs", [](const harness::GridRow& r) {
    std::cout << "job " << r.job_id << "  best " << r.best_score << (r.error ? "  error: " + *r.error : "") << '\n';
  });
  harness::write_results_csv(g.out / "results.csv", rows);
  for (const auto& r : rows) {
    if (r.error) return kRuntime;
  }
  return kOk;
}

// ---- correlate

int cmd_correlate(const Globals& g, const fs::path& results) {
  const auto report = harness::correlate(harness::read_results_csv(results));
  fs::create_directories(g.out);
  write_json(g.out / "correlation.json", report);
  const std::string text = harness::format_report(report);
  write_text(g.out / "correlation.txt", text);
  std::cout << text;
  return kOk;
}

// ---- deploy

struct DeployArgs {
  fs::path checkpoint;
  std::optional<int> zone;
  std::optional<std::string> sensors;
  std::optional<std::string> activate;
  std::optional<fs::path> workspace;
};

int cmd_deploy(const Globals& g, const DeployArgs& a) {
  const harness::Workspace ws(a.workspace.value_or(g.out));
  fabric::Stores stores;
  ws.load(stores);
  harness::DeployOptions opts;
  opts.checkpoint = a.checkpoint;
  opts.zone = a.zone;
  if (a.sensors) opts.sensor_mode = twin::sensor_mode_from_string(*a.sensors);
  if (a.activate) opts.activate = mode_from_string(*a.activate);
  const auto result = harness::deploy(stores, opts);
  ws.save(stores);
  std::cout << result.version << '\n';
  return kOk;
}

// ---- pipeline

struct PipelineArgs {
  double duration = 60.0;
  double rate = 200.0;
  std::optional<std::string> model;
  std::optional<fs::path> workspace;
  double write_delay_ms = 0.0;
  bool virtual_clock = false;
  double malformed = 0.0;
  std::optional<std::string> swap_to;
  double swap_at = 30.0;
};

int cmd_pipeline(const Globals& g, const PipelineArgs& a) {
  fabric::Stores stores;
  if (a.workspace) harness::Workspace(*a.workspace).load(stores);
  if (a.model) {
    if (*a.model == control::kRuleManager) {
      stores.power_config.set(Mode::NormalProduction,
                              {std::string(control::kRuleManager), std::string(control::kBuiltinVersion)});
    } else {
      if (!stores.algorithms.contains(*a.model)) throw ConfigError("model version " + *a.model + " is not stored");
      stores.power_config.set(Mode::NormalProduction, {std::string(control::kDrlManager), *a.model});
    }
  }
  pipeline::PipelineOptions o;
  if (g.config) {
    const auto j = read_json(*g.config);
    if (j.contains("plant")) o.generator.plant = j["plant"].get<drl::FurnaceEnvConfig>();
    o.completeness_threshold = j.value("completeness_threshold", o.completeness_threshold);
    o.generator.material_id = j.value("material_id", o.generator.material_id);
  }
  o.generator.duration_s = a.duration;
  o.generator.rate = a.rate;
  o.generator.malformed_fraction = a.malformed;
  if (g.seed) o.generator.seed = *g.seed;
  o.virtual_clock = a.virtual_clock;
  if (a.write_delay_ms < 0) throw ConfigError("--write-delay-ms must be >= 0");
  o.tag_write_delay = std::chrono::milliseconds(static_cast<std::int64_t>(a.write_delay_ms));
  fs::create_directories(g.out);
  o.dead_letter_path = g.out / "dead_letters.ndjson";
  if (a.swap_to) {
    if (!stores.algorithms.contains(*a.swap_to)) throw ConfigError("swap version " + *a.swap_to + " is not stored");
    o.swap = pipeline::SwapPlan{a.swap_at, Mode::NormalProduction, {std::string(control::kDrlManager), *a.swap_to}};
  }
  pipeline::validate(o);
  std::cout << "running pipeline for " << a.duration << " s at " << a.rate << " records/s"
            << (a.virtual_clock ? " (virtual clock)" : "") << '\n';
  const auto report = pipeline::run_pipeline(stores, o);
  nlohmann::json j = report;
  j["seed"] = o.generator.seed;
  write_json(g.out / "pipeline_report.json", j);
  write_json(g.out / "latency.json", report.latency);
  const std::string table = pipeline::format_table(report.latency);
  write_text(g.out / "latency.txt", table);
  std::cout << table;
  std::cout << "records generated " << report.generated << ", parsed " << report.reformatted << ", dead-lettered "
            << report.dead_lettered << "\nsnapshots published " << report.snapshots.published << ", incomplete "
            << report.snapshots.incomplete << " (" << report.snapshot_rate() << "/s)\nupdates written "
            << report.updater.written << " (" << report.update_rate() << "/s)\n";
  if (report.failure) std::cerr << "pipeline failed: " << *report.failure << '\n';
  return report.passed() ? kOk : kRuntime;
}

// ---- report

struct ReportArgs {
  fs::path trace;
  std::optional<int> episode;
};

int cmd_report(const Globals& g, const ReportArgs& a) {
  drl::RewardSpec reward;
  if (g.config) reward = harness::resolved_env(harness::job_from_json(read_json(*g.config))).reward;
  const auto rows = harness::episode_series(harness::read_trace_csv(a.trace), reward, a.episode);
  fs::create_directories(g.out);
  harness::write_series_csv(g.out / "series.csv", rows);
  std::cout << "wrote " << rows.size() << " rows to " << (g.out / "series.csv").string() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"forgeline: induction furnace twin, DRL training and control pipeline"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "JSON config for the command");
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--out", g.out, "Output directory");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run the twin with a scripted controller");
  simulate->add_option("--steps", sim.steps, "Steps to run")->check(CLI::PositiveNumber);
  simulate->add_option("--controller", sim.controller, "noop, hold, max_power or min_power");

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train one DQN or PPO agent");
  train->add_flag("--grid-mode", tr.grid_mode, "Enforce the grid domains");

  GridArgs gr;
  auto* grid = app.add_subcommand("grid", "Run a hyperparameter grid");
  grid->add_option("--budget", gr.budget, "Maximum number of jobs");
  grid->add_option("--workers", gr.workers, "Parallel jobs")->check(CLI::PositiveNumber);
  grid->add_flag("--dry-run", gr.dry_run, "Validate and count jobs only");

  fs::path results;
  auto* correlate = app.add_subcommand("correlate", "Correlate hyperparameters with scores");
  correlate->add_option("results", results, "results.csv from grid")->required();

  DeployArgs dep;
  auto* deploy = app.add_subcommand("deploy", "Wrap a checkpoint and store it");
  deploy->add_option("checkpoint", dep.checkpoint, "checkpoint.json from train")->required();
  deploy->add_option("--zone", dep.zone, "Controlled zone (1-5)");
  deploy->add_option("--sensors", dep.sensors, "forge or virtual");
  deploy->add_option("--activate", dep.activate, "Select for mode np or wh");
  deploy->add_option("--workspace", dep.workspace, "Store directory (default: --out)");

  PipelineArgs pl;
  auto* pipe = app.add_subcommand("pipeline", "Run the telemetry and control pipeline");
  pipe->add_option("--duration", pl.duration, "Seconds of telemetry");
  pipe->add_option("--rate", pl.rate, "Records per second");
  pipe->add_option("--model", pl.model, "Algorithm version for normal production, or 'rule'");
  pipe->add_option("--workspace", pl.workspace, "Store directory written by deploy");
  pipe->add_option("--write-delay-ms", pl.write_delay_ms, "Artificial tag write delay");
  pipe->add_flag("--virtual-clock", pl.virtual_clock, "Deterministic single-threaded run");
  pipe->add_option("--malformed-fraction", pl.malformed, "Share of garbled raw records");
  pipe->add_option("--swap-to", pl.swap_to, "Hot-swap to this version during the run");
  pipe->add_option("--swap-at", pl.swap_at, "Event-time second of the swap");

  ReportArgs rep;
  auto* report = app.add_subcommand("report", "Extract plot-ready series from a step trace");
  report->add_option("trace", rep.trace, "trace.csv from train")->required();
  report->add_option("--episode", rep.episode, "Episode (default: last)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*simulate) return cmd_simulate(g, sim);
    if (*train) return cmd_train(g, tr);
    if (*grid) return cmd_grid(g, gr);
    if (*correlate) return cmd_correlate(g, results);
    if (*deploy) return cmd_deploy(g, dep);
    if (*pipe) return cmd_pipeline(g, pl);
    if (*report) return cmd_report(g, rep);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const WrappingError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const NotFoundError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kRuntime;
}
