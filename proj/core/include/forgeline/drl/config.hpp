#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace forgeline::drl {

enum class Algorithm { Dqn, Ppo };

std::string_view to_string(Algorithm algorithm);
Algorithm algorithm_from_string(std::string_view text);

/// Hyperparameters shared by both algorithms.
struct CommonConfig {
  int episodes = 50;
  double learning_rate = 0.001;
  std::uint64_t seed = 19;
  int batch_size = 64;
  bool normalize = true;
  bool no_noise_z1z2 = true;       // true: zone 1/2 powers are noise free
  bool use_forge_sensors = false;  // false: 15 virtual zone-3 sensors
};

struct DqnConfig {
  CommonConfig common;
  double gamma = 0.9;
  double epsilon_start = 0.7;
  double epsilon_min = 0.01;
  double epsilon_step = 0.05;  // per episode
  int fc1 = 128;
  int fc2 = 128;
  int target_update_interval = 1000;  // online training steps between syncs
  int memory_capacity = 100000;
};

struct PpoConfig {
  CommonConfig common;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double c1 = 0.5;
  double c2 = 0.01;  // entropy weight
  double clip_epsilon = 0.2;
  int epochs = 10;
  int training_interval = 100;
  int actor_fc1 = 128;
  int actor_fc2 = 128;
  int critic_fc1 = 128;
  int critic_fc2 = 128;
};

/// Range checks that apply in free mode as well (positive sizes, probabilities in [0, 1], ...).
std::vector<std::string> basic_violations(const DqnConfig& config);
std::vector<std::string> basic_violations(const PpoConfig& config);

/// Values outside the published hyperparameter grids, one message per field.
std::vector<std::string> grid_domain_violations(const DqnConfig& config);
std::vector<std::string> grid_domain_violations(const PpoConfig& config);

/// Throws ConfigError listing every violation; grid_mode adds the domain checks.
void validate(const DqnConfig& config, bool grid_mode);
void validate(const PpoConfig& config, bool grid_mode);

void to_json(nlohmann::json& j, const CommonConfig& c);
void from_json(const nlohmann::json& j, CommonConfig& c);
void to_json(nlohmann::json& j, const DqnConfig& c);
void from_json(const nlohmann::json& j, DqnConfig& c);
void to_json(nlohmann::json& j, const PpoConfig& c);
void from_json(const nlohmann::json& j, PpoConfig& c);

/// Allowed grid values per hyperparameter name for an algorithm.
nlohmann::json grid_domains(Algorithm algorithm);

}  // namespace forgeline::drl
