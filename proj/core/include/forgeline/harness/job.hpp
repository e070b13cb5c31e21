#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "forgeline/drl/checkpoint.hpp"
#include "forgeline/drl/config.hpp"
#include "forgeline/drl/env.hpp"
#include "forgeline/drl/reward.hpp"
#include "forgeline/drl/train.hpp"

namespace forgeline::harness {

using AgentConfig = std::variant<drl::DqnConfig, drl::PpoConfig>;

/// One training run: agent, reward, scenario and twin settings.
struct JobSpec {
  drl::Algorithm algorithm = drl::Algorithm::Dqn;
  drl::RewardFamily reward = drl::RewardFamily::Hyperbolic;
  drl::Scenario scenario = drl::Scenario::NormalProduction;
  AgentConfig config = drl::DqnConfig{};
  drl::FurnaceEnvConfig env;  // scenario, reward family and sensor flags are taken from the fields above

  const drl::CommonConfig& common() const;
  drl::CommonConfig& common();
  std::uint64_t seed() const { return common().seed; }
};

/// Throws ConfigError listing every problem; grid mode also enforces the grid domains.
void validate(const JobSpec& job, bool grid_mode);

/// {"algorithm", "reward", "scenario", "config": {flat agent config}, "env": {overrides}}
void to_json(nlohmann::json& j, const JobSpec& job);
JobSpec job_from_json(const nlohmann::json& j);
JobSpec load_job(const std::filesystem::path& path);

/// Twin environment settings after applying the job's scenario, reward and common flags.
drl::FurnaceEnvConfig resolved_env(const JobSpec& job);

/// Seed of the twin's noise stream for a job.
std::uint64_t env_seed(const JobSpec& job);

struct JobResult {
  std::vector<drl::EpisodeMetrics> episodes;
  std::optional<std::string> error;
  drl::Checkpoint checkpoint;
  std::vector<drl::StepTrace> last_episode;  // every step of the final episode

  double best_score() const;
  double final_score() const;
  /// Mean score over the last `n` episodes (fewer if the run was shorter).
  double tail_mean(int n = 10) const;
};

JobResult run_job(const JobSpec& job, bool grid_mode = false);

/// Hyperparameter/value rows echoed before a training run.
std::vector<std::pair<std::string, std::string>> config_table(const JobSpec& job);
std::string format_config_table(const JobSpec& job);

/// Writes job.json, checkpoint.json, metrics.csv and trace.csv into `dir`.
void write_job_outputs(const std::filesystem::path& dir, const JobSpec& job, const JobResult& result);

/// Header: episode,step,action,reward,t_last_c,power_kw
void write_trace_csv(const std::filesystem::path& path, const std::vector<drl::StepTrace>& trace);
std::vector<drl::StepTrace> read_trace_csv(const std::filesystem::path& path);

}  // namespace forgeline::harness
