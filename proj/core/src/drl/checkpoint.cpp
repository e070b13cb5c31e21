#include "forgeline/drl/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "forgeline/common/error.hpp"

namespace forgeline::drl {

namespace {

std::string rng_to_string(const Rng& rng) {
  std::ostringstream out;
  out << rng;
  return out.str();
}

void rng_from_string(Rng& rng, const std::string& text) {
  if (text.empty()) return;
  std::istringstream in(text);
  in >> rng;
  if (!in) throw ConfigError("checkpoint RNG state is unreadable");
}

}  // namespace

const Mlp& Checkpoint::network(const std::string& name) const {
  for (const auto& [key, net] : networks) {
    if (key == name) return net;
  }
  throw NotFoundError("checkpoint has no network '" + name + "'");
}

const Mlp& Checkpoint::policy() const { return network(algorithm == Algorithm::Dqn ? "online" : "actor"); }

nlohmann::json mlp_to_json(const Mlp& net) {
  const MlpShape& s = net.shape();
  return {{"shape", {s.input, s.hidden1, s.hidden2, s.output}}, {"params", net.flatten()}};
}

Mlp mlp_from_json(const nlohmann::json& j) {
  try {
    const auto dims = j.at("shape").get<std::vector<std::size_t>>();
    if (dims.size() != 4) throw ConfigError("network shape needs four sizes");
    for (std::size_t d : dims) {
      if (d == 0) throw ConfigError("network layer sizes must be positive");
    }
    Mlp net(MlpShape{dims[0], dims[1], dims[2], dims[3]});
    const auto params = j.at("params").get<std::vector<double>>();
    if (params.size() != net.parameter_count()) {
      throw ConfigError("network has " + std::to_string(params.size()) + " parameters, shape needs " +
                        std::to_string(net.parameter_count()));
    }
    net.unflatten(params);
    if (!net.all_finite()) throw ConfigError("network parameters are not finite");
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed network: ") + e.what());
  }
}

Checkpoint make_checkpoint(const DqnAgent& agent, const FurnaceEnvConfig& env) {
  Checkpoint c;
  c.algorithm = Algorithm::Dqn;
  c.config = agent.config();
  c.env = env;
  c.networks = {{"online", agent.online()}, {"target", agent.target()}};
  c.rng_state = rng_to_string(const_cast<DqnAgent&>(agent).rng());
  c.train_steps = agent.train_steps();
  return c;
}

Checkpoint make_checkpoint(const PpoAgent& agent, const FurnaceEnvConfig& env) {
  Checkpoint c;
  c.algorithm = Algorithm::Ppo;
  c.config = agent.config();
  c.env = env;
  c.networks = {{"actor", agent.actor()}, {"critic", agent.critic()}};
  c.rng_state = rng_to_string(const_cast<PpoAgent&>(agent).rng());
  return c;
}

DqnAgent restore_dqn(const Checkpoint& c) {
  if (c.algorithm != Algorithm::Dqn) throw ConfigError("checkpoint does not hold a DQN agent");
  const DqnConfig config = c.config.get<DqnConfig>();
  const Mlp& online = c.network("online");
  DqnAgent agent(config, online.shape().input, online.shape().output);
  if (!(online.shape() == agent.online().shape())) throw DimensionError("checkpoint network shape disagrees with its config");
  agent.online() = online;
  agent.target() = c.network("target");
  rng_from_string(agent.rng(), c.rng_state);
  agent.set_train_steps(c.train_steps);
  return agent;
}

PpoAgent restore_ppo(const Checkpoint& c) {
  if (c.algorithm != Algorithm::Ppo) throw ConfigError("checkpoint does not hold a PPO agent");
  const PpoConfig config = c.config.get<PpoConfig>();
  const Mlp& actor = c.network("actor");
  PpoAgent agent(config, actor.shape().input, actor.shape().output);
  if (!(actor.shape() == agent.actor().shape()) || !(c.network("critic").shape() == agent.critic().shape())) {
    throw DimensionError("checkpoint network shape disagrees with its config");
  }
  agent.actor() = actor;
  agent.critic() = c.network("critic");
  rng_from_string(agent.rng(), c.rng_state);
  return agent;
}

nlohmann::json to_json(const Checkpoint& c) {
  nlohmann::json nets = nlohmann::json::object();
  for (const auto& [name, net] : c.networks) nets[name] = mlp_to_json(net);
  return {{"format", "forgeline-agent"},
          {"schema", kCheckpointSchema},
          {"algorithm", std::string(to_string(c.algorithm))},
          {"config", c.config},
          {"env", c.env},
          {"networks", nets},
          {"rng_state", c.rng_state},
          {"train_steps", c.train_steps}};
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object() || j.value("format", "") != "forgeline-agent") {
      throw ConfigError("not an agent checkpoint");
    }
    if (j.at("schema").get<int>() != kCheckpointSchema) throw ConfigError("unsupported checkpoint schema");
    Checkpoint c;
    c.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
    c.config = j.at("config");
    c.env = j.at("env").get<FurnaceEnvConfig>();
    for (const auto& [name, net] : j.at("networks").items()) c.networks.emplace_back(name, mlp_from_json(net));
    c.rng_state = j.value("rng_state", "");
    c.train_steps = j.value("train_steps", std::uint64_t{0});
    const Mlp& policy = c.policy();
    if (policy.shape().output != 3) throw DimensionError("policy network must emit three action scores");
    if (c.algorithm == Algorithm::Dqn) {
      validate(c.config.get<DqnConfig>(), false);
    } else {
      validate(c.config.get<PpoConfig>(), false);
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out << to_json(checkpoint).dump();
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("checkpoint " + path.string() + " not found");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("checkpoint " + path.string() + " is not valid JSON: " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace forgeline::drl
