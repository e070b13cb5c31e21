#include "forgeline/harness/job.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "forgeline/common/error.hpp"

namespace forgeline::harness {

const drl::CommonConfig& JobSpec::common() const {
  return std::visit([](const auto& c) -> const drl::CommonConfig& { return c.common; }, config);
}

drl::CommonConfig& JobSpec::common() {
  return std::visit([](auto& c) -> drl::CommonConfig& { return c.common; }, config);
}

void validate(const JobSpec& job, bool grid_mode) {
  const bool is_dqn = std::holds_alternative<drl::DqnConfig>(job.config);
  if (is_dqn != (job.algorithm == drl::Algorithm::Dqn)) {
    throw ConfigError("job algorithm does not match its config type");
  }
  std::visit([&](const auto& c) { drl::validate(c, grid_mode); }, job.config);
  drl::validate(resolved_env(job));
}

void to_json(nlohmann::json& j, const JobSpec& job) {
  j = {{"algorithm", std::string(drl::to_string(job.algorithm))},
       {"reward", std::string(drl::to_string(job.reward))},
       {"scenario", std::string(drl::to_string(job.scenario))},
       {"env", job.env}};
  std::visit([&](const auto& c) { j["config"] = c; }, job.config);
}

JobSpec job_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("job spec must be a JSON object");
  JobSpec job;
  try {
    job.algorithm = drl::algorithm_from_string(j.value("algorithm", std::string("DQN")));
    if (j.contains("reward")) job.reward = drl::reward_family_from_string(j.at("reward").get<std::string>());
    if (j.contains("scenario")) job.scenario = drl::scenario_from_string(j.at("scenario").get<std::string>());
    if (j.contains("env")) job.env = j.at("env").get<drl::FurnaceEnvConfig>();
    const nlohmann::json cfg = j.value("config", nlohmann::json::object());
    if (job.algorithm == drl::Algorithm::Dqn) {
      job.config = cfg.get<drl::DqnConfig>();
    } else {
      job.config = cfg.get<drl::PpoConfig>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed job spec: ") + e.what());
  }
  return job;
}

JobSpec load_job(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read job spec " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("job spec " + path.string() + " is not valid JSON: " + e.what());
  }
  return job_from_json(j);
}

drl::FurnaceEnvConfig resolved_env(const JobSpec& job) {
  drl::FurnaceEnvConfig env = job.env;
  env.scenario = job.scenario;
  env.reward.family = job.reward;
  env.apply(job.common());
  return env;
}

std::uint64_t env_seed(const JobSpec& job) { return job.seed() + 1; }

double JobResult::best_score() const {
  if (episodes.empty()) return 0.0;
  return std::max_element(episodes.begin(), episodes.end(),
                          [](const auto& a, const auto& b) { return a.score < b.score; })
      ->score;
}

double JobResult::final_score() const { return episodes.empty() ? 0.0 : episodes.back().score; }

double JobResult::tail_mean(int n) const {
  if (episodes.empty() || n <= 0) return 0.0;
  const auto k = std::min<std::size_t>(episodes.size(), static_cast<std::size_t>(n));
  double sum = 0.0;
  for (auto it = episodes.end() - static_cast<std::ptrdiff_t>(k); it != episodes.end(); ++it) sum += it->score;
  return sum / static_cast<double>(k);
}

JobResult run_job(const JobSpec& job, bool grid_mode) {
  validate(job, grid_mode);
  const drl::FurnaceEnvConfig env_cfg = resolved_env(job);
  drl::FurnaceEnv env(env_cfg, env_seed(job));
  JobResult result;
  int current = -1;
  auto observer = [&](const drl::StepTrace& t) {
    if (t.episode != current) {
      current = t.episode;
      result.last_episode.clear();
    }
    result.last_episode.push_back(t);
  };
  drl::TrainResult train;
  if (const auto* dqn = std::get_if<drl::DqnConfig>(&job.config)) {
    drl::DqnAgent agent(*dqn, env.state_dim(), env.action_count());
    train = drl::drl_train(env, agent, observer);
    result.checkpoint = drl::make_checkpoint(agent, env_cfg);
  } else {
    drl::PpoAgent agent(std::get<drl::PpoConfig>(job.config), env.state_dim(), env.action_count());
    train = drl::drl_train(env, agent, observer);
    result.checkpoint = drl::make_checkpoint(agent, env_cfg);
  }
  result.episodes = std::move(train.episodes);
  result.error = std::move(train.error);
  return result;
}

namespace {

std::string num(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

}  // namespace

std::vector<std::pair<std::string, std::string>> config_table(const JobSpec& job) {
  const drl::CommonConfig& c = job.common();
  std::vector<std::pair<std::string, std::string>> rows = {
      {"Episodes", std::to_string(c.episodes)},
      {"Learning rate", num(c.learning_rate)},
      {"Seed", std::to_string(c.seed)},
      {"Batch size", std::to_string(c.batch_size)},
      {"Algorithm", std::string(drl::to_string(job.algorithm))},
  };
  if (const auto* d = std::get_if<drl::DqnConfig>(&job.config)) {
    rows.insert(rows.end(), {{"Gamma", num(d->gamma)},
                             {"Epsilon start", num(d->epsilon_start)},
                             {"Epsilon min", num(d->epsilon_min)},
                             {"Epsilon step", num(d->epsilon_step)},
                             {"F.C.1 neurons", std::to_string(d->fc1)},
                             {"F.C.2 neurons", std::to_string(d->fc2)},
                             {"Target update (C)", std::to_string(d->target_update_interval)},
                             {"Memory capacity", std::to_string(d->memory_capacity)}});
  } else {
    const auto& p = std::get<drl::PpoConfig>(job.config);
    rows.insert(rows.end(), {{"Gamma", num(p.gamma)},
                             {"Lambda", num(p.gae_lambda)},
                             {"C1", num(p.c1)},
                             {"Clip", num(p.clip_epsilon)},
                             {"Epochs", std::to_string(p.epochs)},
                             {"Training interval", std::to_string(p.training_interval)},
                             {"Actor F.C.1 neurons", std::to_string(p.actor_fc1)},
                             {"Actor F.C.2 neurons", std::to_string(p.actor_fc2)},
                             {"Critic F.C.1 neurons", std::to_string(p.critic_fc1)},
                             {"Critic F.C.2 neurons", std::to_string(p.critic_fc2)}});
  }
  rows.insert(rows.end(), {{"Sensors", c.use_forge_sensors ? "forge" : "virtual"},
                           {"Normalization", yes_no(c.normalize)},
                           {"No noise Z1/Z2", yes_no(c.no_noise_z1z2)},
                           {"Reward", std::string(drl::to_string(job.reward))},
                           {"Scenario", std::string(drl::to_string(job.scenario))}});
  return rows;
}

std::string format_config_table(const JobSpec& job) {
  const auto rows = config_table(job);
  std::size_t width = 14;
  for (const auto& [k, _] : rows) width = std::max(width, k.size());
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-*s  %s\n", static_cast<int>(width), "Hyperparameter", "Value");
  out += line;
  for (const auto& [k, v] : rows) {
    std::snprintf(line, sizeof line, "%-*s  %s\n", static_cast<int>(width), k.c_str(), v.c_str());
    out += line;
  }
  return out;
}

void write_job_outputs(const std::filesystem::path& dir, const JobSpec& job, const JobResult& result) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "job.json");
    out << nlohmann::json(job).dump(2) << '\n';
    if (!out) throw Error("cannot write " + (dir / "job.json").string());
  }
  drl::save_checkpoint(dir / "checkpoint.json", result.checkpoint);
  drl::write_metrics_csv(dir / "metrics.csv", result.episodes);
  write_trace_csv(dir / "trace.csv", result.last_episode);
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<drl::StepTrace>& trace) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "episode,step,action,reward,t_last_c,power_kw\n";
  out.precision(17);
  for (const auto& t : trace) {
    out << t.episode << ',' << t.step << ',' << t.action << ',' << t.reward << ',' << t.t_last_c << ','
        << t.power_kw << '\n';
  }
  if (!out) throw Error("cannot write " + path.string());
}

std::vector<drl::StepTrace> read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::string header;
  if (!std::getline(in, header)) throw ConfigError(path.string() + " is empty");
  std::vector<std::string> cols;
  {
    std::stringstream ss(header);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
  }
  const std::vector<std::string> need = {"episode", "step", "action", "reward", "t_last_c", "power_kw"};
  std::vector<std::size_t> idx;
  for (const auto& n : need) {
    auto it = std::find(cols.begin(), cols.end(), n);
    if (it == cols.end()) throw ConfigError(path.string() + " lacks column '" + n + "'");
    idx.push_back(static_cast<std::size_t>(it - cols.begin()));
  }
  std::vector<drl::StepTrace> out;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) f.push_back(c);
    if (f.size() != cols.size()) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(cols.size()) +
                        " fields");
    }
    try {
      drl::StepTrace t;
      t.episode = std::stoi(f[idx[0]]);
      t.step = std::stoi(f[idx[1]]);
      t.action = std::stoi(f[idx[2]]);
      t.reward = std::stod(f[idx[3]]);
      t.t_last_c = std::stod(f[idx[4]]);
      t.power_kw = std::stod(f[idx[5]]);
      out.push_back(t);
    } catch (const std::logic_error&) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": malformed number");
    }
  }
  return out;
}

}  // namespace forgeline::harness
