#include "forgeline/drl/ppo.hpp"

#include <algorithm>
#include <cmath>

#include "forgeline/common/error.hpp"
#include "forgeline/drl/dqn.hpp"

namespace forgeline::drl {

Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits) {
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return logits.array() - lse;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) { return log_softmax(logits).array().exp(); }

std::vector<double> gae(std::span<const double> rewards, std::span<const double> values,
                        std::span<const double> masks, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (masks.size() != n || values.size() != n + 1) {
    throw DimensionError("gae needs |rewards| = |masks| = |values| - 1");
  }
  std::vector<double> adv(n, 0.0);
  double next = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double delta = rewards[k] + gamma * values[k + 1] * masks[k] - values[k];
    next = delta + gamma * lambda * masks[k] * next;
    adv[k] = next;
  }
  return adv;
}

double clipped_surrogate(double ratio, double advantage, double clip_eps) {
  const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
  return std::min(ratio * advantage, clipped * advantage);
}

int sample_categorical(const Eigen::VectorXd& probs, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double cumulative = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    cumulative += probs(i);
    if (u < cumulative) return static_cast<int>(i);
  }
  // Rounding left u above the total; fall back to the last action with mass.
  for (Eigen::Index i = probs.size(); i-- > 0;) {
    if (probs(i) > 0.0) return static_cast<int>(i);
  }
  return 0;
}

ActorLoss actor_loss_and_gradients(const Mlp& actor, const PpoBatch& batch, double clip_eps, double c2) {
  const auto n = static_cast<Eigen::Index>(batch.size());
  if (n == 0) throw DimensionError("empty PPO batch");
  const ForwardCache cache = actor.forward_cached(batch.states);
  const Eigen::Index k = cache.output.rows();
  Eigen::MatrixXd upstream(k, n);
  ActorLoss out;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::VectorXd logp = log_softmax(cache.output.col(j));
    const Eigen::VectorXd pi = logp.array().exp();
    const int a = batch.actions[static_cast<std::size_t>(j)];
    const double ratio = pi(a) / std::max(batch.old_probs(j), kProbabilityFloor);
    const double adv = batch.advantages(j);
    const double unclipped = ratio * adv;
    const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * adv;
    const double entropy = -(pi.array() * logp.array()).sum();
    out.surrogate += std::min(unclipped, clipped) * inv_n;
    out.entropy += entropy * inv_n;

    Eigen::VectorXd d_obj = Eigen::VectorXd::Zero(k);
    if (unclipped <= clipped) {
      // d ratio / d z_i = ratio * (1[i = a] - pi_i)
      d_obj = -ratio * adv * pi;
      d_obj(a) += ratio * adv;
    }
    const Eigen::VectorXd d_entropy = -(pi.array() * (logp.array() + entropy)).matrix();
    upstream.col(j) = -(d_obj + c2 * d_entropy) * inv_n;
  }
  out.loss = -(out.surrogate + c2 * out.entropy);
  out.gradients = actor.backward(cache, upstream);
  return out;
}

CriticLoss critic_loss_and_gradients(const Mlp& critic, const PpoBatch& batch, double c1) {
  const auto n = static_cast<Eigen::Index>(batch.size());
  if (n == 0) throw DimensionError("empty PPO batch");
  if (critic.shape().output != 1) throw DimensionError("critic must have one output");
  const ForwardCache cache = critic.forward_cached(batch.states);
  const Eigen::RowVectorXd diff = cache.output.row(0) - batch.returns.transpose();
  CriticLoss out;
  out.value_loss = diff.squaredNorm() / static_cast<double>(n);
  out.loss = c1 * out.value_loss;
  const Eigen::MatrixXd upstream = (2.0 * c1 / static_cast<double>(n)) * diff;
  out.gradients = critic.backward(cache, upstream);
  return out;
}

PpoAgent::PpoAgent(const PpoConfig& config, std::size_t state_dim, std::size_t action_count)
    : config_(config), rng_(config.common.seed) {
  actor_ = Mlp::random({state_dim, static_cast<std::size_t>(config.actor_fc1),
                        static_cast<std::size_t>(config.actor_fc2), action_count},
                       rng_);
  critic_ = Mlp::random({state_dim, static_cast<std::size_t>(config.critic_fc1),
                         static_cast<std::size_t>(config.critic_fc2), 1},
                        rng_);
}

PpoAction PpoAgent::act(const Eigen::VectorXd& state) { return act(state, rng_); }

PpoAction PpoAgent::act(const Eigen::VectorXd& state, Rng& rng) const {
  const Eigen::VectorXd logp = log_softmax(actor_.forward(state));
  const Eigen::VectorXd probs = logp.array().exp();
  PpoAction out;
  out.action = sample_categorical(probs, rng);
  out.log_prob = logp(out.action);
  out.prob = probs(out.action);
  out.value = critic_.forward(state)(0);
  return out;
}

int PpoAgent::greedy(const Eigen::VectorXd& state) const { return argmax(actor_.forward(state)); }

PpoStats PpoAgent::update(const PpoBatch& batch) {
  PpoStats stats;
  const double lr = config_.common.learning_rate;
  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    ActorLoss a = actor_loss_and_gradients(actor_, batch, config_.clip_epsilon, config_.c2);
    CriticLoss c = critic_loss_and_gradients(critic_, batch, config_.c1);
    actor_.apply_gradients(a.gradients, lr);
    critic_.apply_gradients(c.gradients, lr);
    stats = {a.surrogate, c.value_loss, a.entropy};
  }
  return stats;
}

}  // namespace forgeline::drl
