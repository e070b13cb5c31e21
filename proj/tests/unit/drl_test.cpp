#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "drl_checks.hpp"
#include "forgeline/common/error.hpp"
#include "forgeline/drl/checkpoint.hpp"
#include "forgeline/drl/dqn.hpp"
#include "forgeline/drl/env.hpp"
#include "forgeline/drl/ppo.hpp"
#include "forgeline/drl/reward.hpp"
#include "forgeline/drl/train.hpp"
#include "oracles.hpp"

using namespace forgeline;
using namespace forgeline::drl;

TEST(Gradients, Mlp) { EXPECT_LT(forgeline::testing::mlp_gradient_error(5, 1), 1e-4); }
TEST(Gradients, DqnLoss) { EXPECT_LT(forgeline::testing::dqn_loss_gradient_error(5, 2), 1e-4); }
TEST(Gradients, PpoActor) { EXPECT_LT(forgeline::testing::ppo_actor_gradient_error(5, 3), 1e-4); }
TEST(Gradients, PpoCritic) { EXPECT_LT(forgeline::testing::ppo_critic_gradient_error(5, 4), 1e-4); }

TEST(Mlp, FlattenRoundTripAndShapeChecks) {
  Rng rng(1);
  Mlp net = Mlp::random({4, 5, 6, 3}, rng);
  EXPECT_EQ(net.parameter_count(), 4u * 5 + 5 + 5 * 6 + 6 + 6 * 3 + 3);
  Mlp copy({4, 5, 6, 3});
  copy.unflatten(net.flatten());
  EXPECT_TRUE(copy == net);
  EXPECT_THROW(copy.unflatten(std::vector<double>(3)), DimensionError);
  EXPECT_THROW(Mlp({0, 1, 1, 1}), DimensionError);
}

TEST(Mlp, InitRangeFollowsFanIn) {
  Rng rng(2);
  Mlp net = Mlp::random({16, 128, 128, 3}, rng);
  EXPECT_LE(net.w1.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(16.0));
  EXPECT_LE(net.w2.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(128.0));
}

TEST(Mlp, SgdStepMovesAgainstGradient) {
  Rng rng(3);
  Mlp net = Mlp::random({3, 4, 4, 2}, rng);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 2);
  const Eigen::MatrixXd up = Eigen::MatrixXd::Ones(2, 2);
  const MlpGradients g = net.backward(net.forward_cached(x), up);
  const auto before = net.flatten();
  net.apply_gradients(g, 0.1);
  const auto after = net.flatten();
  const auto flat = g.flatten();
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_DOUBLE_EQ(after[i], before[i] - 0.1 * flat[i]);
}

TEST(Gae, HandCase) {
  const std::vector<double> r{1, 1}, v{0, 0, 0}, m{1, 0};
  const auto a = gae(r, v, m, 0.9, 0.95);
  EXPECT_NEAR(a[0], 1.855, 1e-12);
  EXPECT_NEAR(a[1], 1.0, 1e-12);
}

TEST(Gae, MatchesBruteForce) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int e = 0; e < 100; ++e) {
    const std::size_t n = 1 + rng() % 50;
    std::vector<double> r(n), v(n + 1), m(n);
    for (std::size_t t = 0; t < n; ++t) {
      r[t] = u(rng);
      v[t] = u(rng);
      m[t] = rng() % 7 == 0 ? 0.0 : 1.0;
    }
    v[n] = u(rng);
    const auto fast = gae(r, v, m, 0.99, 0.95);
    const auto slow = forgeline::testing::brute_force_gae(r, v, m, 0.99, 0.95);
    for (std::size_t t = 0; t < n; ++t) ASSERT_NEAR(fast[t], slow[t], 1e-10);
  }
}

TEST(Ppo, ClippedSurrogate) {
  EXPECT_DOUBLE_EQ(clipped_surrogate(1.5, 2.0, 0.2), 2.4);
  EXPECT_DOUBLE_EQ(clipped_surrogate(0.5, 2.0, 0.2), 1.0);
  EXPECT_DOUBLE_EQ(clipped_surrogate(0.5, -2.0, 0.2), -1.6);
  EXPECT_DOUBLE_EQ(clipped_surrogate(1.0, -3.0, 0.2), -3.0);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double r = std::uniform_real_distribution<double>(0, 3)(rng);
    const double a = std::uniform_real_distribution<double>(-5, 5)(rng);
    const double e = std::uniform_real_distribution<double>(0.01, 0.5)(rng);
    ASSERT_LE(clipped_surrogate(r, a, e), r * a);
  }
}

TEST(Ppo, SoftmaxAndSampling) {
  Eigen::VectorXd z(3);
  z << 1000.0, 1000.0, -1000.0;
  const Eigen::VectorXd p = softmax(z);
  EXPECT_NEAR(p.sum(), 1.0, 1e-12);
  EXPECT_NEAR(p(0), 0.5, 1e-12);
  Rng rng(6);
  Eigen::VectorXd q(3);
  q << 0.2, 0.5, 0.3;
  std::vector<double> counts(3, 0.0);
  for (int i = 0; i < 30000; ++i) counts[static_cast<std::size_t>(sample_categorical(q, rng))] += 1;
  EXPECT_NEAR(counts[1] / 30000.0, 0.5, 0.02);
}

TEST(Ppo, UpdateReducesCriticLoss) {
  PpoConfig cfg;
  cfg.epochs = 20;
  cfg.common.learning_rate = 0.01;
  PpoAgent agent(cfg, 4);
  PpoBatch batch;
  Rng rng(7);
  batch.states = Eigen::MatrixXd::Random(4, 16);
  batch.returns = Eigen::VectorXd::Constant(16, 1.0);
  batch.advantages = Eigen::VectorXd::Random(16);
  batch.old_probs = Eigen::VectorXd::Constant(16, 1.0 / 3.0);
  for (int i = 0; i < 16; ++i) batch.actions.push_back(i % 3);
  const double before = critic_loss_and_gradients(agent.critic(), batch, cfg.c1).value_loss;
  agent.update(batch);
  EXPECT_LT(critic_loss_and_gradients(agent.critic(), batch, cfg.c1).value_loss, before);
}

TEST(Dqn, EpsilonSchedule) {
  EXPECT_DOUBLE_EQ(epsilon_schedule(0.7, 0.05, 0.01, 0), 0.7);
  EXPECT_NEAR(epsilon_schedule(0.7, 0.05, 0.01, 4), 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(epsilon_schedule(0.7, 0.05, 0.01, 100), 0.01);
}

TEST(Dqn, ArgmaxTiesGoLow) {
  Eigen::VectorXd q(3);
  q << 1.0, 2.0, 2.0;
  EXPECT_EQ(argmax(q), 1);
}

TEST(Dqn, TargetSyncEveryC) {
  DqnConfig cfg;
  cfg.target_update_interval = 5;
  cfg.common.batch_size = 4;
  DqnAgent agent(cfg, 3);
  TransitionBatch b;
  b.states = Eigen::MatrixXd::Random(3, 4);
  b.next_states = Eigen::MatrixXd::Random(3, 4);
  b.rewards = Eigen::VectorXd::Random(4);
  b.dones = Eigen::VectorXd::Zero(4);
  b.actions = {0, 1, 2, 0};
  const Mlp initial_target = agent.target();
  EXPECT_TRUE(agent.target() == agent.online());
  for (int i = 1; i <= 12; ++i) {
    agent.train_step(b);
    if (i % 5 == 0) {
      EXPECT_TRUE(agent.target() == agent.online()) << i;
    } else {
      EXPECT_FALSE(agent.target() == agent.online()) << i;
    }
    if (i < 5) EXPECT_TRUE(agent.target() == initial_target);
  }
}

TEST(Dqn, LossUsesTargetNetworkAndTerminalMask) {
  Mlp online({1, 1, 1, 2});
  Mlp target({1, 1, 1, 2});
  target.b3 << 3.0, 5.0;
  TransitionBatch b;
  b.states = Eigen::MatrixXd::Ones(1, 2);
  b.next_states = Eigen::MatrixXd::Ones(1, 2);
  b.rewards = Eigen::Vector2d(1.0, 1.0);
  b.dones = Eigen::Vector2d(0.0, 1.0);
  b.actions = {0, 1};
  // y = (1 + 0.5 * 5, 1); Q = 0. loss = mean((3.5)^2, 1^2)
  EXPECT_NEAR(dqn_loss_and_gradients(online, target, b, 0.5).loss, (3.5 * 3.5 + 1.0) / 2.0, 1e-12);
}

TEST(Replay, EvictsOldestFirst) {
  ReplayMemory mem(3, 1);
  for (int i = 0; i < 5; ++i) {
    Transition t{Eigen::VectorXd::Constant(1, i), i % 3, double(i), Eigen::VectorXd::Constant(1, i), false};
    mem.push(t);
  }
  EXPECT_EQ(mem.size(), 3u);
  EXPECT_EQ(mem.oldest_insertion(), 3u);
  EXPECT_EQ(mem.at(0).reward, 2.0);
  EXPECT_EQ(mem.at(2).reward, 4.0);
  EXPECT_THROW(ReplayMemory(0, 1), ConfigError);
}

TEST(Replay, SamplingIsUniform) {
  ReplayMemory mem(50, 1);
  for (int i = 0; i < 80; ++i) mem.push({Eigen::VectorXd::Zero(1), 0, 0.0, Eigen::VectorXd::Zero(1), false});
  Rng rng(8);
  std::vector<double> counts(50, 0.0);
  for (int draw = 0; draw < 4000; ++draw) {
    const auto idx = mem.sample_indices(5, rng);
    std::set<std::size_t> distinct(idx.begin(), idx.end());
    ASSERT_EQ(distinct.size(), 5u);
    for (std::size_t i : idx) counts[i] += 1;
  }
  const double stat = forgeline::testing::chi_squared_uniform(counts);
  EXPECT_GT(forgeline::testing::chi_squared_p_value(stat, 49), 0.01);
}

TEST(Reward, Families) {
  RewardSpec s;
  EXPECT_DOUBLE_EQ(reward(s, 1207.5), 1.0);
  EXPECT_DOUBLE_EQ(reward(s, 1140.0), 0.0);
  EXPECT_DOUBLE_EQ(reward(s, 0.0), -1.0);
  s.family = RewardFamily::Hyperbolic;
  EXPECT_DOUBLE_EQ(reward(s, 1275.0), 0.5);
  s.family = RewardFamily::Asymmetric;
  EXPECT_DOUBLE_EQ(reward(s, 1241.25), 0.0);
  EXPECT_DOUBLE_EQ(reward(s, 1173.75), 0.5);
  EXPECT_THROW(reward_family_from_string("linear"), ConfigError);
}

TEST(Reward, BoundsSweep) {
  RewardSpec sym, asym, hyp;
  asym.family = RewardFamily::Asymmetric;
  hyp.family = RewardFamily::Hyperbolic;
  std::vector<double> rs;
  for (double t = 0.0; t <= 1500.0; t += 0.5) {
    const double a = reward(sym, t), b = reward(asym, t), c = reward(hyp, t);
    ASSERT_GE(a, -1.0);
    ASSERT_LE(a, 1.0);
    ASSERT_GT(c, 0.0);
    ASSERT_LE(c, 1.0);
    if (t > sym.target_c) ASSERT_LE(b, a);
    rs.push_back(c);
  }
  const double mean = episode_score(hyp, rs);
  EXPECT_GE(mean, 0.0);
  EXPECT_LE(mean, 1.0);
  EXPECT_EQ(episode_score(hyp, std::vector<double>{}), 0.0);
}

TEST(Config, DefaultsValidateAndGridDomain) {
  DqnConfig d;
  EXPECT_NO_THROW(validate(d, true));
  d.gamma = 0.5;
  EXPECT_NO_THROW(validate(d, false));
  EXPECT_THROW(validate(d, true), ConfigError);
  d.gamma = 1.5;
  EXPECT_THROW(validate(d, false), ConfigError);
  PpoConfig p;
  EXPECT_NO_THROW(validate(p, true));
  p.clip_epsilon = 0.0;
  EXPECT_THROW(validate(p, false), ConfigError);
}

TEST(Config, JsonRoundTrip) {
  DqnConfig d;
  d.fc1 = 64;
  d.common.seed = 77;
  nlohmann::json j = d;
  EXPECT_EQ(nlohmann::json(j.get<DqnConfig>()), j);
  PpoConfig p;
  p.epochs = 3;
  nlohmann::json k = p;
  EXPECT_EQ(nlohmann::json(k.get<PpoConfig>()), k);
}

namespace {

FurnaceEnvConfig small_env(int steps = 50) {
  FurnaceEnvConfig c;
  c.episode_steps = steps;
  c.reward.family = RewardFamily::Hyperbolic;
  return c;
}

}  // namespace

TEST(Env, ShapesAndReset) {
  FurnaceEnv env(small_env(), 1);
  EXPECT_EQ(env.state_dim(), 16u);
  const Eigen::VectorXd s0 = env.reset();
  EXPECT_EQ(s0.size(), 16);
  env.step(2);
  env.step(2);
  EXPECT_EQ(env.steps_taken(), 2);
  const Eigen::VectorXd again = env.reset();
  EXPECT_TRUE(again.isApprox(s0, 0.0));
  FurnaceEnvConfig forge = small_env();
  forge.sensor_mode = twin::SensorMode::Forge;
  EXPECT_EQ(FurnaceEnv(forge, 1).state_dim(), 5u);
}

TEST(Env, EpisodeEndsAfterConfiguredSteps) {
  FurnaceEnv env(small_env(7), 1);
  env.reset();
  for (int i = 1; i <= 7; ++i) {
    const EnvStep s = env.step(1);
    EXPECT_EQ(s.done, i == 7);
    EXPECT_GT(s.reward, 0.0);
  }
}

TEST(Env, ActionsMoveControlledPower) {
  FurnaceEnv env(small_env(), 1);
  env.reset();
  const double p0 = env.controlled_power();
  env.step(2);
  EXPECT_DOUBLE_EQ(env.controlled_power(), p0 + 5.0);
  env.step(0);
  env.step(0);
  EXPECT_DOUBLE_EQ(env.controlled_power(), p0 - 5.0);
  EXPECT_THROW(env.step(3), DimensionError);
}

TEST(Train, DqnIsDeterministicForSeed) {
  DqnConfig cfg;
  cfg.common.episodes = 3;
  cfg.common.batch_size = 8;
  cfg.fc1 = cfg.fc2 = 16;
  auto run = [&] {
    FurnaceEnv env(small_env(40), 5);
    DqnAgent agent(cfg, env.state_dim());
    return drl_train(env, agent);
  };
  const TrainResult a = run();
  const TrainResult b = run();
  ASSERT_EQ(a.episodes.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_TRUE(a.episodes[i].same_outcome(b.episodes[i]));
    EXPECT_DOUBLE_EQ(*a.episodes[i].epsilon, epsilon_schedule(0.7, 0.05, 0.01, static_cast<int>(i)));
    EXPECT_GE(a.episodes[i].score, 0.0);
    EXPECT_LE(a.episodes[i].score, 1.0);
  }
}

TEST(Train, PpoRunsAndReportsMetrics) {
  PpoConfig cfg;
  cfg.common.episodes = 2;
  cfg.training_interval = 10;
  cfg.epochs = 2;
  cfg.actor_fc1 = cfg.actor_fc2 = cfg.critic_fc1 = cfg.critic_fc2 = 16;
  FurnaceEnv env(small_env(30), 5);
  PpoAgent agent(cfg, env.state_dim());
  const TrainResult r = drl_train(env, agent);
  ASSERT_EQ(r.episodes.size(), 2u);
  EXPECT_EQ(r.episodes[0].steps, 30);
  EXPECT_FALSE(r.episodes[0].epsilon.has_value());
}

TEST(Train, MetricsCsvRoundTrip) {
  DqnConfig cfg;
  cfg.common.episodes = 2;
  cfg.common.batch_size = 8;
  cfg.fc1 = cfg.fc2 = 8;
  FurnaceEnv env(small_env(20), 5);
  DqnAgent agent(cfg, env.state_dim());
  const TrainResult r = drl_train(env, agent);
  const auto path = std::filesystem::temp_directory_path() / "forgeline_metrics_test.csv";
  write_metrics_csv(path, r.episodes);
  const auto back = read_metrics_csv(path);
  ASSERT_EQ(back.size(), r.episodes.size());
  for (std::size_t i = 0; i < back.size(); ++i) EXPECT_TRUE(back[i].same_outcome(r.episodes[i]));
  std::filesystem::remove(path);
}

TEST(Checkpoint, DqnRoundTripRestoresBehavior) {
  DqnConfig cfg;
  cfg.fc1 = cfg.fc2 = 8;
  DqnAgent agent(cfg, 16);
  agent.set_train_steps(42);
  const Checkpoint cp = make_checkpoint(agent, small_env());
  const Checkpoint back = checkpoint_from_json(to_json(cp));
  DqnAgent restored = restore_dqn(back);
  EXPECT_TRUE(restored.online() == agent.online());
  EXPECT_TRUE(restored.target() == agent.target());
  EXPECT_EQ(restored.train_steps(), 42u);
  Eigen::VectorXd s = Eigen::VectorXd::Constant(16, 0.5);
  EXPECT_EQ(restored.act(s, 0.5), agent.act(s, 0.5));
  EXPECT_THROW(checkpoint_from_json(nlohmann::json{{"schema", 99}}), ConfigError);
}

TEST(Checkpoint, PpoRoundTrip) {
  PpoConfig cfg;
  cfg.actor_fc1 = cfg.actor_fc2 = cfg.critic_fc1 = cfg.critic_fc2 = 8;
  PpoAgent agent(cfg, 16);
  const Checkpoint cp = checkpoint_from_json(to_json(make_checkpoint(agent, small_env())));
  PpoAgent restored = restore_ppo(cp);
  EXPECT_TRUE(restored.actor() == agent.actor());
  EXPECT_TRUE(restored.critic() == agent.critic());
}
