#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "forgeline/drl/config.hpp"
#include "forgeline/drl/dqn.hpp"
#include "forgeline/drl/env.hpp"
#include "forgeline/drl/mlp.hpp"
#include "forgeline/drl/ppo.hpp"

namespace forgeline::drl {

inline constexpr int kCheckpointSchema = 1;

/// Self-describing agent bundle: config echo, environment contract, flat
/// parameter arrays per network and the agent RNG state.
struct Checkpoint {
  Algorithm algorithm = Algorithm::Dqn;
  nlohmann::json config;  // DqnConfig or PpoConfig
  FurnaceEnvConfig env;
  std::vector<std::pair<std::string, Mlp>> networks;  // online/target or actor/critic
  std::string rng_state;
  std::uint64_t train_steps = 0;

  /// The network that scores actions: DQN online net or PPO actor.
  const Mlp& policy() const;
  const Mlp& network(const std::string& name) const;
  std::size_t state_dim() const { return policy().shape().input; }
};

nlohmann::json mlp_to_json(const Mlp& net);
Mlp mlp_from_json(const nlohmann::json& j);

Checkpoint make_checkpoint(const DqnAgent& agent, const FurnaceEnvConfig& env);
Checkpoint make_checkpoint(const PpoAgent& agent, const FurnaceEnvConfig& env);

DqnAgent restore_dqn(const Checkpoint& checkpoint);
PpoAgent restore_ppo(const Checkpoint& checkpoint);

nlohmann::json to_json(const Checkpoint& checkpoint);
/// Throws ConfigError on a malformed or inconsistent bundle.
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace forgeline::drl
