#include "forgeline/drl/train.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "forgeline/common/error.hpp"

namespace forgeline::drl {

namespace {

using SteadyClock = std::chrono::steady_clock;

double ms_since(SteadyClock::time_point start) {
  return std::chrono::duration<double, std::milli>(SteadyClock::now() - start).count();
}

/// Per-episode bookkeeping shared by every loop.
class EpisodeRecorder {
 public:
  EpisodeRecorder(const Environment& env, int episode) : env_(env), start_(SteadyClock::now()) {
    metrics_.episode = episode;
    sample();
  }

  void record(const StepTrace& trace, const StepObserver& observer) {
    rewards_.push_back(trace.reward);
    const RewardSpec& spec = env_.reward_spec();
    if (trace.t_last_c >= spec.band_min() && trace.t_last_c <= spec.band_max()) ++in_band_;
    ++metrics_.steps;
    if (metrics_.steps % kMetricSampleEvery == 0) sample();
    if (observer) observer(trace);
  }

  void add_loss(double loss) {
    loss_sum_ += loss;
    ++loss_count_;
  }

  EpisodeMetrics finish() {
    metrics_.total_ms = ms_since(start_);
    metrics_.mean_step_ms = metrics_.steps > 0 ? metrics_.total_ms / metrics_.steps : 0.0;
    metrics_.mean_loss = loss_count_ > 0 ? loss_sum_ / loss_count_ : 0.0;
    metrics_.score = episode_score(env_.reward_spec(), rewards_);
    metrics_.in_band_fraction = metrics_.steps > 0 ? static_cast<double>(in_band_) / metrics_.steps : 0.0;
    return metrics_;
  }

  EpisodeMetrics& metrics() { return metrics_; }

 private:
  void sample() {
    metrics_.t_last_series.push_back(env_.last_temperature());
    metrics_.power_series.push_back(env_.controlled_power());
  }

  const Environment& env_;
  SteadyClock::time_point start_;
  EpisodeMetrics metrics_;
  std::vector<double> rewards_;
  int in_band_ = 0;
  double loss_sum_ = 0.0;
  int loss_count_ = 0;
};

StepTrace trace_of(const Environment& env, int episode, int step, int action, double reward) {
  return {episode, step, action, reward, env.last_temperature(), env.controlled_power()};
}

}  // namespace

bool EpisodeMetrics::same_outcome(const EpisodeMetrics& o) const {
  return episode == o.episode && score == o.score && mean_loss == o.mean_loss && steps == o.steps &&
         in_band_fraction == o.in_band_fraction && t_last_series == o.t_last_series &&
         power_series == o.power_series && epsilon == o.epsilon;
}

TrainResult drl_train(Environment& env, DqnAgent& agent, const StepObserver& observer) {
  if (env.state_dim() != agent.state_dim() || env.action_count() != agent.action_count()) {
    throw DimensionError("agent and environment dimensions differ");
  }
  const DqnConfig& cfg = agent.config();
  TrainResult result;
  for (int ep = 0; ep < cfg.common.episodes; ++ep) {
    const double eps = epsilon_schedule(cfg.epsilon_start, cfg.epsilon_step, cfg.epsilon_min, ep);
    std::optional<EpisodeRecorder> rec;
    try {
      Eigen::VectorXd state = env.reset();
      rec.emplace(env, ep);
      rec->metrics().epsilon = eps;
      for (int k = 1;; ++k) {
        const int action = agent.act(state, eps);
        EnvStep out = env.step(action);
        agent.memory().push({state, action, out.reward, out.state, out.done});
        if (agent.ready()) rec->add_loss(agent.train_from_memory());
        rec->record(trace_of(env, ep, k, action, out.reward), observer);
        state = std::move(out.state);
        if (out.done) break;
      }
    } catch (const std::exception& e) {
      if (rec) result.episodes.push_back(rec->finish());
      result.error = "episode " + std::to_string(ep) + ": " + e.what();
      return result;
    }
    result.episodes.push_back(rec->finish());
  }
  return result;
}

TrainResult drl_train(Environment& env, PpoAgent& agent, const StepObserver& observer) {
  if (env.state_dim() != agent.state_dim() || env.action_count() != agent.action_count()) {
    throw DimensionError("agent and environment dimensions differ");
  }
  const PpoConfig& cfg = agent.config();
  const auto interval = static_cast<std::size_t>(cfg.training_interval);
  const auto dim = static_cast<Eigen::Index>(env.state_dim());

  Eigen::MatrixXd states(dim, static_cast<Eigen::Index>(interval));
  std::vector<int> actions;
  std::vector<double> probs, rewards, values, masks;
  auto clear = [&] {
    actions.clear();
    probs.clear();
    rewards.clear();
    values.clear();
    masks.clear();
  };

  TrainResult result;
  for (int ep = 0; ep < cfg.common.episodes; ++ep) {
    std::optional<EpisodeRecorder> rec;
    try {
      Eigen::VectorXd state = env.reset();
      rec.emplace(env, ep);
      for (int k = 1;; ++k) {
        const PpoAction a = agent.act(state);
        EnvStep out = env.step(a.action);
        states.col(static_cast<Eigen::Index>(actions.size())) = state;
        actions.push_back(a.action);
        probs.push_back(a.prob);
        values.push_back(a.value);
        rewards.push_back(out.reward);
        masks.push_back(out.done ? 0.0 : 1.0);
        if (actions.size() == interval) {
          values.push_back(agent.value(out.state));
          const std::vector<double> adv = gae(rewards, values, masks, cfg.gamma, cfg.gae_lambda);
          PpoBatch batch;
          batch.states = states;
          batch.actions = actions;
          batch.old_probs = Eigen::Map<const Eigen::VectorXd>(probs.data(), static_cast<Eigen::Index>(probs.size()));
          batch.advantages = Eigen::Map<const Eigen::VectorXd>(adv.data(), static_cast<Eigen::Index>(adv.size()));
          batch.returns = batch.advantages +
                          Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(interval));
          const PpoStats stats = agent.update(batch);
          rec->add_loss(-stats.policy_loss + cfg.c1 * stats.value_loss - cfg.c2 * stats.entropy);
          clear();
        }
        rec->record(trace_of(env, ep, k, a.action, out.reward), observer);
        state = std::move(out.state);
        if (out.done) break;
      }
    } catch (const std::exception& e) {
      if (rec) result.episodes.push_back(rec->finish());
      result.error = "episode " + std::to_string(ep) + ": " + e.what();
      return result;
    }
    result.episodes.push_back(rec->finish());
  }
  return result;
}

TrainResult evaluate_policy(Environment& env, const Policy& policy, int episodes, const StepObserver& observer) {
  TrainResult result;
  for (int ep = 0; ep < episodes; ++ep) {
    std::optional<EpisodeRecorder> rec;
    try {
      Eigen::VectorXd state = env.reset();
      rec.emplace(env, ep);
      for (int k = 1;; ++k) {
        const int action = policy(state);
        EnvStep out = env.step(action);
        rec->record(trace_of(env, ep, k, action, out.reward), observer);
        state = std::move(out.state);
        if (out.done) break;
      }
    } catch (const std::exception& e) {
      if (rec) result.episodes.push_back(rec->finish());
      result.error = "episode " + std::to_string(ep) + ": " + e.what();
      return result;
    }
    result.episodes.push_back(rec->finish());
  }
  return result;
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<EpisodeMetrics>& metrics) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write metrics to " + path.string());
  out.precision(17);
  out << "episode,score,mean_loss,mean_step_ms,total_ms,steps,in_band_fraction,epsilon,t_last_series,power_series\n";
  for (const EpisodeMetrics& m : metrics) {
    auto quoted = [](const std::vector<double>& v) {
      std::string s = nlohmann::json(v).dump();
      return "\"" + s + "\"";
    };
    out << m.episode << ',' << m.score << ',' << m.mean_loss << ',' << m.mean_step_ms << ',' << m.total_ms << ','
        << m.steps << ',' << m.in_band_fraction << ',';
    if (m.epsilon) out << *m.epsilon;
    out << ',' << quoted(m.t_last_series) << ',' << quoted(m.power_series) << '\n';
  }
}

std::vector<EpisodeMetrics> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot read metrics from " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("episode,score", 0) != 0) {
    throw ConfigError("metrics file " + path.string() + " lacks the expected header");
  }
  std::vector<EpisodeMetrics> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (char ch : line) {
      if (ch == '"') {
        quoted = !quoted;
      } else if (ch == ',' && !quoted) {
        cells.push_back(cell);
        cell.clear();
      } else {
        cell += ch;
      }
    }
    cells.push_back(cell);
    if (cells.size() != 10) throw ConfigError("malformed metrics row: " + line);
    try {
      EpisodeMetrics m;
      m.episode = std::stoi(cells[0]);
      m.score = std::stod(cells[1]);
      m.mean_loss = std::stod(cells[2]);
      m.mean_step_ms = std::stod(cells[3]);
      m.total_ms = std::stod(cells[4]);
      m.steps = std::stoi(cells[5]);
      m.in_band_fraction = std::stod(cells[6]);
      if (!cells[7].empty()) m.epsilon = std::stod(cells[7]);
      m.t_last_series = nlohmann::json::parse(cells[8]).get<std::vector<double>>();
      m.power_series = nlohmann::json::parse(cells[9]).get<std::vector<double>>();
      out.push_back(std::move(m));
    } catch (const std::exception& e) {
      throw ConfigError("malformed metrics row: " + line + " (" + e.what() + ")");
    }
  }
  return out;
}

}  // namespace forgeline::drl
