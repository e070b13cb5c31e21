#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "forgeline/drl/dqn.hpp"
#include "forgeline/drl/env.hpp"
#include "forgeline/drl/ppo.hpp"

namespace forgeline::drl {

inline constexpr int kMetricSampleEvery = 500;

struct EpisodeMetrics {
  int episode = 0;
  double score = 0.0;
  double mean_loss = 0.0;  // 0 when no training step ran
  double mean_step_ms = 0.0;
  double total_ms = 0.0;
  int steps = 0;
  double in_band_fraction = 0.0;  // steps whose last-sensor temperature lies in the reward band
  std::vector<double> t_last_series;  // step 0 and every 500 steps
  std::vector<double> power_series;
  std::optional<double> epsilon;  // DQN only

  /// Equality on everything except the timing fields.
  bool same_outcome(const EpisodeMetrics& other) const;
};

struct StepTrace {
  int episode = 0;
  int step = 0;  // 1-based within the episode
  int action = 0;
  double reward = 0.0;
  double t_last_c = 0.0;
  double power_kw = 0.0;
};

using StepObserver = std::function<void(const StepTrace&)>;

struct TrainResult {
  std::vector<EpisodeMetrics> episodes;
  std::optional<std::string> error;  // set when the environment failed mid-run
};

/// DQN training loop: act, step, remember, then one SGD step per env step once
/// memory holds a batch.
TrainResult drl_train(Environment& env, DqnAgent& agent, const StepObserver& observer = {});

/// PPO variant: one update every `training_interval` steps over the collected rollout.
TrainResult drl_train(Environment& env, PpoAgent& agent, const StepObserver& observer = {});

/// Runs `policy` without learning; returns per-episode metrics.
using Policy = std::function<int(const Eigen::VectorXd&)>;
TrainResult evaluate_policy(Environment& env, const Policy& policy, int episodes,
                            const StepObserver& observer = {});

/// Header: episode,score,mean_loss,mean_step_ms,total_ms,steps,in_band_fraction,epsilon,
/// t_last_series,power_series (series JSON encoded).
void write_metrics_csv(const std::filesystem::path& path, const std::vector<EpisodeMetrics>& metrics);
std::vector<EpisodeMetrics> read_metrics_csv(const std::filesystem::path& path);

}  // namespace forgeline::drl
