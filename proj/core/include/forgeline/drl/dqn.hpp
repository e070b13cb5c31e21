#pragma once

#include <cstdint>
#include <utility>

#include <Eigen/Dense>

#include "forgeline/drl/config.hpp"
#include "forgeline/drl/mlp.hpp"
#include "forgeline/drl/replay.hpp"

namespace forgeline::drl {

/// Index of the largest element; ties go to the lowest index.
int argmax(const Eigen::VectorXd& values);

/// max(eps_min, eps_start - k * eps_step) after k finished episodes.
double epsilon_schedule(double eps_start, double eps_step, double eps_min, int episodes_elapsed);

struct DqnLoss {
  double loss = 0.0;
  MlpGradients gradients;
};

/// Mean squared TD error of the online net against targets from `target`,
/// y = r + (1 - done) * gamma * max_a Q_target(s', a), and its gradient.
DqnLoss dqn_loss_and_gradients(const Mlp& online, const Mlp& target, const TransitionBatch& batch,
                               double gamma);

/// Online and target networks plus replay memory. Action indices 0, 1, 2 mean
/// decrease, keep and increase.
class DqnAgent {
 public:
  DqnAgent(const DqnConfig& config, std::size_t state_dim, std::size_t action_count = 3);

  const DqnConfig& config() const { return config_; }
  std::size_t state_dim() const { return online_.shape().input; }
  std::size_t action_count() const { return online_.shape().output; }

  Eigen::VectorXd q_values(const Eigen::VectorXd& state) const { return online_.forward(state); }
  int greedy(const Eigen::VectorXd& state) const { return argmax(online_.forward(state)); }

  /// Epsilon-greedy: with probability eps a uniform action, else the greedy one.
  int act(const Eigen::VectorXd& state, double eps);
  int act(const Eigen::VectorXd& state, double eps, Rng& rng) const;

  /// One SGD step on the online net; syncs the target every C calls.
  double train_step(const TransitionBatch& batch);

  /// Trains on a batch sampled from memory; call only when ready().
  bool ready() const { return memory_.size() >= static_cast<std::size_t>(config_.common.batch_size); }
  double train_from_memory();

  const Mlp& online() const { return online_; }
  const Mlp& target() const { return target_; }
  Mlp& online() { return online_; }
  Mlp& target() { return target_; }
  ReplayMemory& memory() { return memory_; }
  const ReplayMemory& memory() const { return memory_; }
  Rng& rng() { return rng_; }
  std::uint64_t train_steps() const { return train_steps_; }
  void set_train_steps(std::uint64_t n) { train_steps_ = n; }

 private:
  DqnConfig config_;
  Mlp online_;
  Mlp target_;
  ReplayMemory memory_;
  Rng rng_;
  std::uint64_t train_steps_ = 0;
};

}  // namespace forgeline::drl
