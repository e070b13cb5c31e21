#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "forgeline/common/error.hpp"
#include "forgeline/control/manager.hpp"
#include "forgeline/harness/correlate.hpp"
#include "forgeline/harness/deploy.hpp"
#include "forgeline/harness/grid.hpp"
#include "forgeline/harness/job.hpp"
#include "forgeline/harness/series.hpp"
#include "forgeline/harness/simulate.hpp"
#include "oracles.hpp"

using namespace forgeline;
using namespace forgeline::harness;
using nlohmann::json;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("forgeline_harness_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

JobSpec tiny_job(std::uint64_t seed = 19) {
  JobSpec job;
  drl::DqnConfig c;
  c.common.episodes = 2;
  c.common.batch_size = 8;
  c.common.seed = seed;
  job.config = c;
  job.env.episode_steps = 20;
  return job;
}

GridRow row(std::size_t id, std::vector<std::pair<std::string, json>> hp, double best) {
  GridRow r;
  r.job_id = id;
  r.hyperparameters = std::move(hp);
  r.best_score = best;
  return r;
}

std::size_t zone3_last() { return 9; }

}  // namespace

TEST(Simulate, DefaultRunHasOneRowPerStep) {
  SimulateOptions o;
  o.twin = simulation_twin_config(json::object(), 100);
  const SimulateResult r = simulate(o);
  EXPECT_EQ(r.trajectory.steps.size(), 100u);
  EXPECT_FALSE(r.summary.error);
  EXPECT_LE(r.summary.min_c, r.summary.mean_c);
  EXPECT_LE(r.summary.mean_c, r.summary.max_c);
}

TEST(Simulate, ZeroPowerOnlyCools) {
  SimulateOptions o;
  o.twin = simulation_twin_config(json{{"initial_powers", {0, 0, 0, 0, 0}}, {"power_bounds", {0, 600}}}, 200);
  o.steps = 200;
  o.controller = "hold";
  const SimulateResult r = simulate(o);
  ASSERT_FALSE(r.trajectory.steps.empty());
  for (std::size_t i = 0; i < r.initial.rods.size(); ++i) {
    const auto& before = r.initial.rods[i].segment_temps;
    const auto& after = r.trajectory.steps.back().state.rods[i].segment_temps;
    for (std::size_t s = 0; s < before.size(); ++s) EXPECT_LE(after[s], before[s] + 1e-12);
  }
}

TEST(Simulate, MaxPowerHeatsZoneThreeEarly) {
  SimulateOptions o;
  o.twin = simulation_twin_config(json::object(), 400);
  o.steps = 400;
  o.controller = "max_power";
  const SimulateResult r = simulate(o);
  double peak = 0.0;
  for (const auto& s : r.trajectory.steps) peak = std::max(peak, s.readout.temps[zone3_last()]);
  EXPECT_GT(peak, o.twin.ambient_temp);
  const auto& z3 = r.trajectory.steps;
  for (std::size_t i = 1; i < z3.size(); ++i) {
    EXPECT_GE(z3[i].state.zone_powers[2], z3[i - 1].state.zone_powers[2]);
  }
}

TEST(Simulate, UnknownControllerRejected) {
  EXPECT_THROW(scripted_controller("wiggle"), ConfigError);
}

TEST(Job, JsonRoundTripAndConfigTable) {
  JobSpec job;
  job.algorithm = drl::Algorithm::Ppo;
  drl::PpoConfig p;
  p.common.episodes = 100;
  p.common.batch_size = 4096;
  p.gae_lambda = 1.0;
  p.clip_epsilon = 0.2;
  p.epochs = 20;
  p.training_interval = 100;
  p.actor_fc1 = 256;
  p.actor_fc2 = 512;
  p.critic_fc1 = 256;
  p.critic_fc2 = 256;
  job.config = p;
  EXPECT_NO_THROW(validate(job, true));
  const JobSpec back = job_from_json(json(job));
  EXPECT_EQ(json(back), json(job));
  const std::string table = format_config_table(job);
  EXPECT_NE(table.find("4096"), std::string::npos);
  EXPECT_NE(table.find("512"), std::string::npos);
}

TEST(Job, GridModeRejectsOutOfDomainLearningRate) {
  JobSpec job = tiny_job();
  std::get<drl::DqnConfig>(job.config).common.learning_rate = 0.5;
  EXPECT_THROW(validate(job, true), ConfigError);
}

TEST(Job, AlgorithmMustMatchConfig) {
  JobSpec job = tiny_job();
  job.algorithm = drl::Algorithm::Ppo;
  EXPECT_THROW(validate(job, false), ConfigError);
}

TEST(Job, SameSeedSameMetrics) {
  const JobResult a = run_job(tiny_job(7));
  const JobResult b = run_job(tiny_job(7));
  ASSERT_EQ(a.episodes.size(), 2u);
  ASSERT_EQ(a.episodes.size(), b.episodes.size());
  for (std::size_t i = 0; i < a.episodes.size(); ++i) {
    EXPECT_EQ(a.episodes[i].score, b.episodes[i].score);
    EXPECT_EQ(a.episodes[i].t_last_series, b.episodes[i].t_last_series);
  }
  EXPECT_EQ(a.last_episode.size(), 20u);
}

TEST(Job, OutputsRecordSeed) {
  const auto dir = scratch("job_outputs");
  const JobSpec job = tiny_job(39);
  const JobResult r = run_job(job);
  write_job_outputs(dir, job, r);
  for (auto f : {"job.json", "checkpoint.json", "metrics.csv", "trace.csv"}) EXPECT_TRUE(std::filesystem::exists(dir / f));
  EXPECT_EQ(load_job(dir / "job.json").seed(), 39u);
  const auto trace = read_trace_csv(dir / "trace.csv");
  ASSERT_EQ(trace.size(), r.last_episode.size());
  EXPECT_EQ(trace.back().power_kw, r.last_episode.back().power_kw);
}

TEST(Job, AfterWarmholdingScenarioResolves) {
  JobSpec job = tiny_job();
  job.scenario = drl::Scenario::AfterWarmholding;
  EXPECT_EQ(resolved_env(job).scenario, drl::Scenario::AfterWarmholding);
  const JobResult r = run_job(job);
  EXPECT_FALSE(r.error);
}

TEST(Grid, TwoByTwoProduct) {
  GridSpec g = grid_from_json(json::parse(R"({
    "base": {"algorithm": "DQN", "config": {"seed": 19}},
    "axes": {"episodes": [50, 100], "learning_rate": [0.001, 0.0001]}
  })"));
  EXPECT_EQ(grid_size(g), 4u);
  const auto jobs = expand_grid(g);
  ASSERT_EQ(jobs.size(), 4u);
  EXPECT_EQ(jobs[0].common().episodes, 50);
  EXPECT_EQ(jobs[1].common().learning_rate, 0.0001);
  EXPECT_EQ(jobs[2].common().episodes, 100);
  EXPECT_EQ(combination(g, 3)[1].second, 0.0001);
}

TEST(Grid, BudgetSamplesReproducibly) {
  GridSpec g;
  g.axes = {{"a", {1, 2, 3, 4, 5, 6}}, {"b", {1, 2, 3, 4, 5}}};
  g.budget = 7;
  g.sample_seed = 11;
  const auto first = select_combinations(g);
  EXPECT_EQ(first, select_combinations(g));
  ASSERT_EQ(first.size(), 7u);
  EXPECT_TRUE(std::is_sorted(first.begin(), first.end()));
  EXPECT_EQ(std::set<std::size_t>(first.begin(), first.end()).size(), 7u);
  for (auto i : first) EXPECT_LT(i, 30u);
  g.sample_seed = 12;
  EXPECT_NE(first, select_combinations(g));
  g.budget = 100;
  EXPECT_EQ(select_combinations(g).size(), 30u);
}

TEST(Grid, RandomProductsMatchCount) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    GridSpec g;
    std::size_t expect = 1;
    const int axes = 1 + static_cast<int>(rng() % 4);
    for (int a = 0; a < axes; ++a) {
      const std::size_t n = 1 + rng() % 5;
      expect *= n;
      g.axes.push_back({"k" + std::to_string(a), std::vector<json>(n, json(a))});
    }
    ASSERT_EQ(grid_size(g), expect);
    ASSERT_EQ(select_combinations(g).size(), expect);
  }
}

TEST(Grid, Rejections) {
  EXPECT_THROW(grid_from_json(json::parse(R"({"axes": {}})")), ConfigError);
  EXPECT_THROW(grid_from_json(json::parse(R"({"axes": {"episodes": []}})")), ConfigError);
  EXPECT_THROW(grid_from_json(json::parse(R"({"axes": {"bogus": [1]}})")), ConfigError);
  GridSpec g = grid_from_json(json::parse(R"({"base": {"config": {"seed": 19}}, "axes": {"learning_rate": [0.001, 0.5]}})"));
  try {
    expand_grid(g);
    FAIL() << "expected rejection";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("combination 1"), std::string::npos);
  }
}

TEST(Grid, RunProducesOneRowPerJob) {
  GridSpec g;
  g.base = tiny_job();
  std::get<drl::DqnConfig>(g.base.config).common.episodes = 50;
  g.base.env.episode_steps = 3;
  g.axes = {{"gamma", {0.9, 0.99}}, {"batch_size", {64, 128}}};
  g.workers = 2;
  const auto dir = scratch("grid_run");
  const auto rows = run_grid(g, dir);
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].job_id, i);
    EXPECT_FALSE(rows[i].error);
    EXPECT_TRUE(std::filesystem::exists(dir / ("job-" + std::to_string(i)) / "metrics.csv"));
  }
  write_results_csv(dir / "results.csv", rows);
  const auto back = read_results_csv(dir / "results.csv");
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].hyperparameters, rows[i].hyperparameters);
    EXPECT_DOUBLE_EQ(back[i].best_score, rows[i].best_score);
    EXPECT_DOUBLE_EQ(back[i].last10_score, rows[i].last10_score);
  }
}

TEST(ResultsCsv, ErrorsAndStringsSurvive) {
  const auto dir = scratch("results_csv");
  std::vector<GridRow> rows{row(0, {{"reward", "hyperbolic"}, {"normalize", true}}, 0.5),
                            row(1, {{"reward", "a,b"}, {"normalize", false}}, 0.25)};
  rows[1].error = "diverged, \"badly\"";
  write_results_csv(dir / "r.csv", rows);
  const auto back = read_results_csv(dir / "r.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].hyperparameters[0].second, "a,b");
  EXPECT_EQ(back[0].hyperparameters[1].second, true);
  EXPECT_EQ(*back[1].error, "diverged, \"badly\"");
  EXPECT_FALSE(back[0].error);
}

TEST(Correlate, PearsonMatchesReference) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> x(3 + rng() % 20), y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = n(rng);
      y[i] = 0.3 * x[i] + n(rng);
    }
    ASSERT_NEAR(*pearson(x, y), forgeline::testing::reference_pearson(x, y), 1e-12);
  }
  EXPECT_FALSE(pearson({1.0}, {2.0}));
  EXPECT_FALSE(pearson({1, 1, 1}, {1, 2, 3}));
}

TEST(Correlate, FiveJobFixture) {
  const std::vector<double> epochs{5, 10, 15, 20, 30};
  const std::vector<double> scores{0.41, 0.38, 0.52, 0.49, 0.61};
  std::vector<GridRow> rows;
  for (std::size_t i = 0; i < 5; ++i) {
    rows.push_back(row(i, {{"epochs", epochs[i]}, {"clip_epsilon", 0.2}, {"normalize", i % 2 == 0}}, scores[i]));
  }
  const CorrelationReport r = correlate(rows);
  EXPECT_EQ(r.jobs, 5u);
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_NEAR(*r.rows[0].r, forgeline::testing::reference_pearson(epochs, scores), 1e-12);
  EXPECT_TRUE(r.rows[0].significant);
  EXPECT_FALSE(r.rows[1].r);
  EXPECT_FALSE(r.rows[1].significant);
  const std::vector<double> flags{1, 0, 1, 0, 1};
  EXPECT_NEAR(*r.rows[2].r, forgeline::testing::reference_pearson(flags, scores), 1e-12);
  const auto& means = r.value_means.at("normalize");
  ASSERT_EQ(means.size(), 2u);
  EXPECT_EQ(means[1].jobs, 3u);
  EXPECT_NEAR(means[1].mean_score, (0.41 + 0.52 + 0.61) / 3.0, 1e-12);
  EXPECT_NE(format_report(r).find("n/a"), std::string::npos);
}

TEST(Correlate, LinearScoreGivesOne) {
  std::vector<GridRow> rows;
  for (int i = 0; i < 6; ++i) rows.push_back(row(i, {{"epochs", 5 * (i + 1)}}, 0.1 * i + 0.2));
  EXPECT_NEAR(*correlate(rows).rows[0].r, 1.0, 1e-12);
}

TEST(Correlate, NeedsThreeSuccessfulJobs) {
  std::vector<GridRow> rows{row(0, {{"epochs", 5}}, 1), row(1, {{"epochs", 10}}, 2), row(2, {{"epochs", 15}}, 3)};
  rows[2].error = "failed";
  EXPECT_THROW(correlate(rows), ConfigError);
}

TEST(Series, BandColumnsAndLength) {
  std::vector<drl::StepTrace> trace;
  for (int e = 0; e < 2; ++e) {
    for (int s = 1; s <= 2000; ++s) trace.push_back({e, s, 0, 0.5, 1200.0 + s, 20.0});
  }
  const auto rows = episode_series(trace, drl::RewardSpec{});
  ASSERT_EQ(rows.size(), 2000u);
  for (const auto& r : rows) {
    ASSERT_EQ(r.band_min_c, 1140.0);
    ASSERT_EQ(r.band_max_c, 1275.0);
  }
  EXPECT_EQ(rows.back().t_last_c, 3200.0);
  EXPECT_EQ(episode_series(trace, drl::RewardSpec{}, 0).size(), 2000u);
  EXPECT_THROW(episode_series({}, drl::RewardSpec{}), ConfigError);
}

TEST(Deploy, CheckpointBecomesSelectableVersion) {
  const auto dir = scratch("deploy");
  const JobSpec job = tiny_job();
  const JobResult r = run_job(job);
  write_job_outputs(dir / "run", job, r);
  fabric::Stores stores;
  DeployOptions o;
  o.checkpoint = dir / "run" / "checkpoint.json";
  o.activate = Mode::NormalProduction;
  const DeployResult d = deploy(stores, o);
  EXPECT_EQ(d.version.size(), 16u);
  EXPECT_TRUE(stores.algorithms.contains(d.version));
  EXPECT_EQ(stores.power_config.get(Mode::NormalProduction).version, d.version);
  EXPECT_EQ(d.model.zone, 3);

  Workspace ws(dir / "ws");
  ws.save(stores);
  fabric::Stores reloaded;
  ws.load(reloaded);
  EXPECT_TRUE(reloaded.algorithms.contains(d.version));
  EXPECT_EQ(reloaded.power_config.get(Mode::NormalProduction).version, d.version);
}

TEST(Deploy, CorruptCheckpointLeavesStoreUnchanged) {
  const auto dir = scratch("deploy_corrupt");
  std::ofstream(dir / "bad.json") << "{\"algorithm\": \"DQN\", \"policy\": 3";
  fabric::Stores stores;
  DeployOptions o;
  o.checkpoint = dir / "bad.json";
  o.activate = Mode::NormalProduction;
  const auto before = stores.power_config.get(Mode::NormalProduction);
  EXPECT_ANY_THROW(deploy(stores, o));
  EXPECT_TRUE(stores.algorithms.versions().empty());
  EXPECT_EQ(stores.power_config.get(Mode::NormalProduction), before);
}

TEST(Deploy, WrongZoneDimensionRejected) {
  const auto dir = scratch("deploy_zone");
  const JobSpec job = tiny_job();
  write_job_outputs(dir, job, run_job(job));
  fabric::Stores stores;
  DeployOptions o;
  o.checkpoint = dir / "checkpoint.json";
  o.zone = 1;
  o.sensor_mode = twin::SensorMode::Forge;  // a zone-1 forge agent expects 2 temps, not 15
  EXPECT_ANY_THROW(deploy(stores, o));
  EXPECT_TRUE(stores.algorithms.versions().empty());
}
