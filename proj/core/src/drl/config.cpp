#include "forgeline/drl/config.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "forgeline/common/error.hpp"

namespace forgeline::drl {

std::string_view to_string(Algorithm algorithm) { return algorithm == Algorithm::Dqn ? "DQN" : "PPO"; }

Algorithm algorithm_from_string(std::string_view text) {
  if (text == "DQN" || text == "dqn") return Algorithm::Dqn;
  if (text == "PPO" || text == "ppo") return Algorithm::Ppo;
  throw ConfigError("unknown algorithm '" + std::string(text) + "'");
}

namespace {

const std::vector<double> kEpisodes{50, 100, 200, 300};
const std::vector<double> kLearningRates{0.001, 0.0001, 0.00001};
const std::vector<double> kSeeds{19, 39};
const std::vector<double> kBatchSizes{64, 128, 256, 512, 1024, 2048, 4096};
const std::vector<double> kGammas{0.9, 0.95, 0.98, 0.99};
const std::vector<double> kEpsilonStarts{0.7, 0.8, 0.9, 1.0};
const std::vector<double> kEpsilonMins{0.01, 0.001, 0.0001, 0.00001};
const std::vector<double> kEpsilonSteps{0.05, 0.005, 0.0005, 0.00005};
const std::vector<double> kLayerSizes{128, 256, 512};
const std::vector<double> kTargetIntervals{1000, 10000, 100000};
const std::vector<double> kMemories{100000, 200000, 500000};
const std::vector<double> kLambdas{0.9, 0.95, 0.98, 0.99, 1.0};
const std::vector<double> kC1{0.5, 1.0};
const std::vector<double> kClips{0.1, 0.2, 0.3};
const std::vector<double> kEpochs{5, 10, 15, 20, 25, 30};
const std::vector<double> kIntervals{10, 25, 50, 100, 200, 500, 1000, 2000, 5000};

bool in_domain(double value, const std::vector<double>& domain) {
  return std::any_of(domain.begin(), domain.end(), [value](double d) {
    return std::abs(value - d) <= 1e-12 * std::max(1.0, std::abs(d));
  });
}

void check(std::vector<std::string>& out, const char* name, double value, const std::vector<double>& domain) {
  if (!in_domain(value, domain)) {
    std::ostringstream msg;
    msg << name << "=" << value << " is not in the grid domain {";
    for (std::size_t i = 0; i < domain.size(); ++i) msg << (i ? ", " : "") << domain[i];
    msg << "}";
    out.push_back(msg.str());
  }
}

void common_grid(std::vector<std::string>& out, const CommonConfig& c) {
  check(out, "episodes", c.episodes, kEpisodes);
  check(out, "learning_rate", c.learning_rate, kLearningRates);
  check(out, "seed", static_cast<double>(c.seed), kSeeds);
  check(out, "batch_size", c.batch_size, kBatchSizes);
}

void common_basic(std::vector<std::string>& out, const CommonConfig& c) {
  if (c.episodes < 1) out.push_back("episodes must be >= 1");
  if (!(c.learning_rate > 0.0) || !std::isfinite(c.learning_rate)) out.push_back("learning_rate must be > 0");
  if (c.batch_size < 1) out.push_back("batch_size must be >= 1");
}

void throw_if(const std::vector<std::string>& violations, std::string_view what) {
  if (violations.empty()) return;
  std::string msg = "invalid " + std::string(what) + " config: ";
  for (std::size_t i = 0; i < violations.size(); ++i) msg += (i ? "; " : "") + violations[i];
  throw ConfigError(msg);
}

template <typename T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

nlohmann::json to_array(const std::vector<double>& values) { return nlohmann::json(values); }

}  // namespace

std::vector<std::string> basic_violations(const DqnConfig& c) {
  std::vector<std::string> out;
  common_basic(out, c.common);
  if (!(c.gamma >= 0.0 && c.gamma <= 1.0)) out.push_back("gamma must lie in [0, 1]");
  if (!(c.epsilon_start >= 0.0 && c.epsilon_start <= 1.0)) out.push_back("epsilon_start must lie in [0, 1]");
  if (!(c.epsilon_min >= 0.0 && c.epsilon_min <= c.epsilon_start)) out.push_back("epsilon_min must lie in [0, epsilon_start]");
  if (!(c.epsilon_step >= 0.0)) out.push_back("epsilon_step must be >= 0");
  if (c.fc1 < 1 || c.fc2 < 1) out.push_back("hidden layer sizes must be >= 1");
  if (c.target_update_interval < 1) out.push_back("target_update_interval must be >= 1");
  if (c.memory_capacity < c.common.batch_size) out.push_back("memory_capacity must be >= batch_size");
  return out;
}

std::vector<std::string> basic_violations(const PpoConfig& c) {
  std::vector<std::string> out;
  common_basic(out, c.common);
  if (!(c.gamma >= 0.0 && c.gamma <= 1.0)) out.push_back("gamma must lie in [0, 1]");
  if (!(c.gae_lambda >= 0.0 && c.gae_lambda <= 1.0)) out.push_back("gae_lambda must lie in [0, 1]");
  if (!(c.c1 >= 0.0)) out.push_back("c1 must be >= 0");
  if (!(c.c2 >= 0.0)) out.push_back("c2 must be >= 0");
  if (!(c.clip_epsilon > 0.0 && c.clip_epsilon < 1.0)) out.push_back("clip_epsilon must lie in (0, 1)");
  if (c.epochs < 1) out.push_back("epochs must be >= 1");
  if (c.training_interval < 1) out.push_back("training_interval must be >= 1");
  if (c.actor_fc1 < 1 || c.actor_fc2 < 1 || c.critic_fc1 < 1 || c.critic_fc2 < 1) {
    out.push_back("hidden layer sizes must be >= 1");
  }
  return out;
}

std::vector<std::string> grid_domain_violations(const DqnConfig& c) {
  std::vector<std::string> out;
  common_grid(out, c.common);
  check(out, "gamma", c.gamma, kGammas);
  check(out, "epsilon_start", c.epsilon_start, kEpsilonStarts);
  check(out, "epsilon_min", c.epsilon_min, kEpsilonMins);
  check(out, "epsilon_step", c.epsilon_step, kEpsilonSteps);
  check(out, "fc1", c.fc1, kLayerSizes);
  check(out, "fc2", c.fc2, kLayerSizes);
  check(out, "target_update_interval", c.target_update_interval, kTargetIntervals);
  check(out, "memory_capacity", c.memory_capacity, kMemories);
  return out;
}

std::vector<std::string> grid_domain_violations(const PpoConfig& c) {
  std::vector<std::string> out;
  common_grid(out, c.common);
  check(out, "gae_lambda", c.gae_lambda, kLambdas);
  check(out, "c1", c.c1, kC1);
  check(out, "clip_epsilon", c.clip_epsilon, kClips);
  check(out, "epochs", c.epochs, kEpochs);
  check(out, "training_interval", c.training_interval, kIntervals);
  check(out, "actor_fc1", c.actor_fc1, kLayerSizes);
  check(out, "actor_fc2", c.actor_fc2, kLayerSizes);
  check(out, "critic_fc1", c.critic_fc1, kLayerSizes);
  check(out, "critic_fc2", c.critic_fc2, kLayerSizes);
  return out;
}

void validate(const DqnConfig& c, bool grid_mode) {
  auto v = basic_violations(c);
  if (grid_mode) {
    auto g = grid_domain_violations(c);
    v.insert(v.end(), g.begin(), g.end());
  }
  throw_if(v, "DQN");
}

void validate(const PpoConfig& c, bool grid_mode) {
  auto v = basic_violations(c);
  if (grid_mode) {
    auto g = grid_domain_violations(c);
    v.insert(v.end(), g.begin(), g.end());
  }
  throw_if(v, "PPO");
}

void to_json(nlohmann::json& j, const CommonConfig& c) {
  j = {{"episodes", c.episodes},
       {"learning_rate", c.learning_rate},
       {"seed", c.seed},
       {"batch_size", c.batch_size},
       {"normalize", c.normalize},
       {"no_noise_z1z2", c.no_noise_z1z2},
       {"use_forge_sensors", c.use_forge_sensors}};
}

void from_json(const nlohmann::json& j, CommonConfig& c) {
  read_if(j, "episodes", c.episodes);
  read_if(j, "learning_rate", c.learning_rate);
  read_if(j, "seed", c.seed);
  read_if(j, "batch_size", c.batch_size);
  read_if(j, "normalize", c.normalize);
  read_if(j, "no_noise_z1z2", c.no_noise_z1z2);
  read_if(j, "use_forge_sensors", c.use_forge_sensors);
}

void to_json(nlohmann::json& j, const DqnConfig& c) {
  to_json(j, c.common);
  j["gamma"] = c.gamma;
  j["epsilon_start"] = c.epsilon_start;
  j["epsilon_min"] = c.epsilon_min;
  j["epsilon_step"] = c.epsilon_step;
  j["fc1"] = c.fc1;
  j["fc2"] = c.fc2;
  j["target_update_interval"] = c.target_update_interval;
  j["memory_capacity"] = c.memory_capacity;
}

void from_json(const nlohmann::json& j, DqnConfig& c) {
  if (!j.is_object()) throw ConfigError("DQN config must be a JSON object");
  try {
    from_json(j, c.common);
    read_if(j, "gamma", c.gamma);
    read_if(j, "epsilon_start", c.epsilon_start);
    read_if(j, "epsilon_min", c.epsilon_min);
    read_if(j, "epsilon_step", c.epsilon_step);
    read_if(j, "fc1", c.fc1);
    read_if(j, "fc2", c.fc2);
    read_if(j, "target_update_interval", c.target_update_interval);
    read_if(j, "memory_capacity", c.memory_capacity);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed DQN config: ") + e.what());
  }
}

void to_json(nlohmann::json& j, const PpoConfig& c) {
  to_json(j, c.common);
  j["gamma"] = c.gamma;
  j["gae_lambda"] = c.gae_lambda;
  j["c1"] = c.c1;
  j["c2"] = c.c2;
  j["clip_epsilon"] = c.clip_epsilon;
  j["epochs"] = c.epochs;
  j["training_interval"] = c.training_interval;
  j["actor_fc1"] = c.actor_fc1;
  j["actor_fc2"] = c.actor_fc2;
  j["critic_fc1"] = c.critic_fc1;
  j["critic_fc2"] = c.critic_fc2;
}

void from_json(const nlohmann::json& j, PpoConfig& c) {
  if (!j.is_object()) throw ConfigError("PPO config must be a JSON object");
  try {
    from_json(j, c.common);
    read_if(j, "gamma", c.gamma);
    read_if(j, "gae_lambda", c.gae_lambda);
    read_if(j, "c1", c.c1);
    read_if(j, "c2", c.c2);
    read_if(j, "clip_epsilon", c.clip_epsilon);
    read_if(j, "epochs", c.epochs);
    read_if(j, "training_interval", c.training_interval);
    read_if(j, "actor_fc1", c.actor_fc1);
    read_if(j, "actor_fc2", c.actor_fc2);
    read_if(j, "critic_fc1", c.critic_fc1);
    read_if(j, "critic_fc2", c.critic_fc2);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed PPO config: ") + e.what());
  }
}

nlohmann::json grid_domains(Algorithm algorithm) {
  nlohmann::json j = {{"episodes", to_array(kEpisodes)},
                      {"learning_rate", to_array(kLearningRates)},
                      {"seed", to_array(kSeeds)},
                      {"batch_size", to_array(kBatchSizes)},
                      {"normalize", {true, false}},
                      {"no_noise_z1z2", {true, false}},
                      {"use_forge_sensors", {true, false}}};
  if (algorithm == Algorithm::Dqn) {
    j["gamma"] = to_array(kGammas);
    j["epsilon_start"] = to_array(kEpsilonStarts);
    j["epsilon_min"] = to_array(kEpsilonMins);
    j["epsilon_step"] = to_array(kEpsilonSteps);
    j["fc1"] = to_array(kLayerSizes);
    j["fc2"] = to_array(kLayerSizes);
    j["target_update_interval"] = to_array(kTargetIntervals);
    j["memory_capacity"] = to_array(kMemories);
  } else {
    j["gae_lambda"] = to_array(kLambdas);
    j["c1"] = to_array(kC1);
    j["clip_epsilon"] = to_array(kClips);
    j["epochs"] = to_array(kEpochs);
    j["training_interval"] = to_array(kIntervals);
    j["actor_fc1"] = to_array(kLayerSizes);
    j["actor_fc2"] = to_array(kLayerSizes);
    j["critic_fc1"] = to_array(kLayerSizes);
    j["critic_fc2"] = to_array(kLayerSizes);
  }
  return j;
}

}  // namespace forgeline::drl
