#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "forgeline/drl/config.hpp"
#include "forgeline/drl/mlp.hpp"

namespace forgeline::drl {

inline constexpr double kProbabilityFloor = 1e-8;

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);
Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits);

/// Backward recursion over TD residuals. `values` holds one extra bootstrap entry;
/// masks are 1 while the episode continues past step t and 0 at its end.
std::vector<double> gae(std::span<const double> rewards, std::span<const double> values,
                        std::span<const double> masks, double gamma, double lambda);

/// min(r * A, clip(r, 1 - eps, 1 + eps) * A).
double clipped_surrogate(double ratio, double advantage, double clip_eps);

/// One collected rollout, columns are steps.
struct PpoBatch {
  Eigen::MatrixXd states;
  std::vector<int> actions;
  Eigen::VectorXd old_probs;  // pi_old(a_t | s_t)
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;  // advantage + old value

  std::size_t size() const { return actions.size(); }
};

struct ActorLoss {
  double surrogate = 0.0;  // mean clipped surrogate
  double entropy = 0.0;    // mean policy entropy
  double loss = 0.0;       // -(surrogate + c2 * entropy)
  MlpGradients gradients;  // of `loss`
};

struct CriticLoss {
  double value_loss = 0.0;  // mean squared error against returns
  double loss = 0.0;        // c1 * value_loss
  MlpGradients gradients;   // of `loss`
};

ActorLoss actor_loss_and_gradients(const Mlp& actor, const PpoBatch& batch, double clip_eps, double c2);
CriticLoss critic_loss_and_gradients(const Mlp& critic, const PpoBatch& batch, double c1);

struct PpoStats {
  double policy_loss = 0.0;  // mean clipped surrogate of the last epoch
  double value_loss = 0.0;
  double entropy = 0.0;
};

struct PpoAction {
  int action = 0;
  double log_prob = 0.0;
  double prob = 0.0;
  double value = 0.0;
};

/// Actor emits raw scores turned into a categorical distribution when sampling;
/// critic emits one state value.
class PpoAgent {
 public:
  PpoAgent(const PpoConfig& config, std::size_t state_dim, std::size_t action_count = 3);

  const PpoConfig& config() const { return config_; }
  std::size_t state_dim() const { return actor_.shape().input; }
  std::size_t action_count() const { return actor_.shape().output; }

  PpoAction act(const Eigen::VectorXd& state);
  PpoAction act(const Eigen::VectorXd& state, Rng& rng) const;
  int greedy(const Eigen::VectorXd& state) const;
  double value(const Eigen::VectorXd& state) const { return critic_.forward(state)(0); }

  /// Full-batch update for every epoch with the old probabilities held fixed.
  PpoStats update(const PpoBatch& batch);

  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  Mlp& actor() { return actor_; }
  Mlp& critic() { return critic_; }
  Rng& rng() { return rng_; }

 private:
  PpoConfig config_;
  Mlp actor_;
  Mlp critic_;
  Rng rng_;
};

/// Samples an index from `probs` by inverse CDF.
int sample_categorical(const Eigen::VectorXd& probs, Rng& rng);

}  // namespace forgeline::drl
