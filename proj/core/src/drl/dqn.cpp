#include "forgeline/drl/dqn.hpp"

#include <algorithm>

#include "forgeline/common/error.hpp"

namespace forgeline::drl {

int argmax(const Eigen::VectorXd& values) {
  if (values.size() == 0) throw DimensionError("argmax of an empty vector");
  int best = 0;
  for (int i = 1; i < values.size(); ++i) {
    if (values(i) > values(best)) best = i;
  }
  return best;
}

double epsilon_schedule(double eps_start, double eps_step, double eps_min, int k) {
  return std::max(eps_min, eps_start - static_cast<double>(k) * eps_step);
}

DqnLoss dqn_loss_and_gradients(const Mlp& online, const Mlp& target, const TransitionBatch& batch,
                               double gamma) {
  const auto n = static_cast<Eigen::Index>(batch.size());
  if (n == 0) throw DimensionError("empty training batch");
  const ForwardCache cache = online.forward_cached(batch.states);
  const Eigen::MatrixXd next_q = target.forward_batch(batch.next_states);

  Eigen::MatrixXd upstream = Eigen::MatrixXd::Zero(cache.output.rows(), n);
  double loss = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double y = batch.rewards(j) + (1.0 - batch.dones(j)) * gamma * next_q.col(j).maxCoeff();
    const int a = batch.actions[static_cast<std::size_t>(j)];
    const double diff = cache.output(a, j) - y;
    loss += diff * diff;
    upstream(a, j) = 2.0 * diff / static_cast<double>(n);
  }
  return {loss / static_cast<double>(n), online.backward(cache, upstream)};
}

DqnAgent::DqnAgent(const DqnConfig& config, std::size_t state_dim, std::size_t action_count)
    : config_(config),
      memory_(static_cast<std::size_t>(std::max(config.memory_capacity, 1)), state_dim),
      rng_(config.common.seed) {
  const MlpShape shape{state_dim, static_cast<std::size_t>(config.fc1),
                       static_cast<std::size_t>(config.fc2), action_count};
  online_ = Mlp::random(shape, rng_);
  target_ = online_;
}

int DqnAgent::act(const Eigen::VectorXd& state, double eps) { return act(state, eps, rng_); }

int DqnAgent::act(const Eigen::VectorXd& state, double eps, Rng& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < eps) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(action_count()) - 1);
    return pick(rng);
  }
  return greedy(state);
}

double DqnAgent::train_step(const TransitionBatch& batch) {
  DqnLoss result = dqn_loss_and_gradients(online_, target_, batch, config_.gamma);
  online_.apply_gradients(result.gradients, config_.common.learning_rate);
  ++train_steps_;
  if (train_steps_ % static_cast<std::uint64_t>(config_.target_update_interval) == 0) target_ = online_;
  return result.loss;
}

double DqnAgent::train_from_memory() {
  return train_step(memory_.sample(static_cast<std::size_t>(config_.common.batch_size), rng_));
}

}  // namespace forgeline::drl
