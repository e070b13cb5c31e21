#include "forgeline/drl/env.hpp"

#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "forgeline/common/error.hpp"

namespace forgeline::drl {

namespace {

constexpr double kFurnaceLength = 26.25;

double layout_offset(const FurnaceEnvConfig& c) {
  return c.rod_velocity * static_cast<double>(c.resolved_warmup_steps() + c.episode_steps) + 1.0;
}

}  // namespace

std::string_view to_string(Scenario scenario) {
  return scenario == Scenario::NormalProduction ? "normal_production" : "after_warmholding";
}

Scenario scenario_from_string(std::string_view text) {
  if (text == "normal_production" || text == "NormalProduction" || text == "normal") {
    return Scenario::NormalProduction;
  }
  if (text == "after_warmholding" || text == "AfterWarmholding") return Scenario::AfterWarmholding;
  throw ConfigError("unknown scenario '" + std::string(text) + "'");
}

twin::PowerAction action_from_index(int index) {
  switch (index) {
    case 0: return twin::PowerAction::Decrease;
    case 1: return twin::PowerAction::NoChange;
    case 2: return twin::PowerAction::Increase;
    default: throw DimensionError("action index " + std::to_string(index) + " outside {0, 1, 2}");
  }
}

void FurnaceEnvConfig::apply(const CommonConfig& common) {
  sensor_mode = common.use_forge_sensors ? twin::SensorMode::Forge : twin::SensorMode::Virtual;
  normalize = common.normalize;
  z1z2_noise = !common.no_noise_z1z2;
}

int FurnaceEnvConfig::resolved_warmup_steps() const {
  if (warmup_steps > 0) return warmup_steps;
  return static_cast<int>(std::ceil(kFurnaceLength / rod_velocity)) + 20;
}

void validate(const FurnaceEnvConfig& c) {
  if (c.zone < 1 || c.zone > static_cast<int>(kZoneCount)) throw ConfigError("controlled zone must lie in 1..5");
  if (c.episode_steps < 1) throw ConfigError("episode_steps must be >= 1");
  if (c.warmup_steps < 0) throw ConfigError("warmup_steps must be >= 0");
  if (!(c.rod_velocity > 0.0)) throw ConfigError("rod_velocity must be > 0");
  if (!(c.heating_gain >= 0.0)) throw ConfigError("heating_gain must be >= 0");
  if (!(c.noise_fraction >= 0.0 && c.noise_fraction < 1.0)) throw ConfigError("noise_fraction must lie in [0, 1)");
  validate(c.norm);
  validate(c.reward);
}

void to_json(nlohmann::json& j, const FurnaceEnvConfig& c) {
  j = {{"scenario", std::string(to_string(c.scenario))},
       {"zone", c.zone},
       {"episode_steps", c.episode_steps},
       {"warmup_steps", c.warmup_steps},
       {"rod_velocity", c.rod_velocity},
       {"heating_gain", c.heating_gain},
       {"sensor_mode", std::string(twin::to_string(c.sensor_mode))},
       {"initial_powers", c.initial_powers},
       {"normalize", c.normalize},
       {"z1z2_noise", c.z1z2_noise},
       {"noise_fraction", c.noise_fraction},
       {"norm_bounds", c.norm},
       {"reward", c.reward},
       {"zebra_hot_c", c.zebra_hot_c},
       {"zebra_cold_c", c.zebra_cold_c},
       {"zebra_band_m", c.zebra_band_m}};
}

void from_json(const nlohmann::json& j, FurnaceEnvConfig& c) {
  if (!j.is_object()) throw ConfigError("environment config must be a JSON object");
  try {
    if (j.contains("scenario")) c.scenario = scenario_from_string(j.at("scenario").get<std::string>());
    c.zone = j.value("zone", c.zone);
    c.episode_steps = j.value("episode_steps", c.episode_steps);
    c.warmup_steps = j.value("warmup_steps", c.warmup_steps);
    c.rod_velocity = j.value("rod_velocity", c.rod_velocity);
    c.heating_gain = j.value("heating_gain", c.heating_gain);
    if (j.contains("sensor_mode")) c.sensor_mode = twin::sensor_mode_from_string(j.at("sensor_mode").get<std::string>());
    if (j.contains("initial_powers")) j.at("initial_powers").get_to(c.initial_powers);
    c.normalize = j.value("normalize", c.normalize);
    c.z1z2_noise = j.value("z1z2_noise", c.z1z2_noise);
    c.noise_fraction = j.value("noise_fraction", c.noise_fraction);
    if (j.contains("norm_bounds")) j.at("norm_bounds").get_to(c.norm);
    if (j.contains("reward")) j.at("reward").get_to(c.reward);
    c.zebra_hot_c = j.value("zebra_hot_c", c.zebra_hot_c);
    c.zebra_cold_c = j.value("zebra_cold_c", c.zebra_cold_c);
    c.zebra_band_m = j.value("zebra_band_m", c.zebra_band_m);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed environment config: ") + e.what());
  }
}

Eigen::VectorXd native_observation(std::span<const double> temps, double power_kw, bool normalize,
                                   const NormBounds& norm) {
  Eigen::VectorXd obs(static_cast<Eigen::Index>(temps.size() + 1));
  for (std::size_t i = 0; i < temps.size(); ++i) {
    obs(static_cast<Eigen::Index>(i)) = normalize ? norm.temperature(temps[i]) : temps[i];
  }
  obs(obs.size() - 1) = normalize ? norm.power(power_kw) : power_kw;
  return obs;
}

twin::TwinConfig FurnaceEnv::make_twin_config(const FurnaceEnvConfig& c) {
  twin::TwinConfig tc = twin::default_twin_config(layout_offset(c));
  tc.rod_velocity = c.rod_velocity;
  tc.heating_gain = c.heating_gain;
  tc.initial_powers = c.initial_powers;
  tc.sensor_mode = c.sensor_mode;
  tc.total_steps = c.episode_steps;
  auto& virt = tc.sensor_positions_virtual[static_cast<std::size_t>(c.zone - 1)];
  if (virt.empty()) {
    virt = twin::default_virtual_sensor_positions(tc.coil_layout, tc.sensor_positions_forge, c.zone);
  }
  return tc;
}

FurnaceEnv::FurnaceEnv(FurnaceEnvConfig config, std::uint64_t seed)
    : config_((validate(config), std::move(config))), twin_(make_twin_config(config_)), rng_(seed) {
  const twin::TwinConfig& tc = twin_.config();
  const auto z = static_cast<std::size_t>(config_.zone);
  if (config_.sensor_mode == twin::SensorMode::Forge) {
    const std::size_t first = forge_sensor_offset(z);
    positions_.assign(tc.sensor_positions_forge.begin() + static_cast<std::ptrdiff_t>(first),
                      tc.sensor_positions_forge.begin() +
                          static_cast<std::ptrdiff_t>(first + kForgeSensorsPerZone[z - 1]));
  } else {
    positions_ = tc.sensor_positions_virtual[z - 1];
  }

  const double offset = tc.furnace_start();
  const double front = offset + kFurnaceLength;
  twin::Rod rod = twin::make_rod("rod-1", front, front, tc.ambient_temp, tc.segment_length);
  start_ = twin_.init({rod});
  const int warmup = config_.resolved_warmup_steps();
  for (int k = 0; k < warmup; ++k) twin_.advance(start_);
  start_.clock = 0;

  if (config_.scenario == Scenario::AfterWarmholding) {
    twin::Rod& warm = start_.rods.front();
    twin::Rod zebra = twin::zebra_init(warm, config_.zebra_hot_c, config_.zebra_cold_c, config_.zebra_band_m,
                                       tc.segment_length, tc.ambient_temp);
    // Only the stretch inside the furnace carries the stoppage pattern.
    for (std::size_t i = 0; i < warm.segment_temps.size(); ++i) {
      const double x = twin::segment_center(warm, i, tc.segment_length);
      if (x >= tc.furnace_start() && x <= tc.furnace_end()) warm.segment_temps[i] = zebra.segment_temps[i];
    }
  }
  state_ = start_;
  read();
}

Eigen::VectorXd FurnaceEnv::reset() {
  state_ = start_;
  steps_ = 0;
  read();
  return observe();
}

EnvStep FurnaceEnv::step(int action) {
  if (steps_ >= config_.episode_steps) throw Error("episode already finished; call reset()");
  if (config_.z1z2_noise) {
    std::uniform_real_distribution<double> noise(-config_.noise_fraction, config_.noise_fraction);
    ZoneVector powers = state_.zone_powers;
    powers[0] = config_.initial_powers[0] * (1.0 + noise(rng_));
    powers[1] = config_.initial_powers[1] * (1.0 + noise(rng_));
    twin_.set_zone_powers(state_, powers);
  }
  twin::ZoneActions actions;
  actions.fill(twin::PowerAction::NoChange);
  actions[static_cast<std::size_t>(config_.zone - 1)] = action_from_index(action);
  twin_.advance(state_, actions);
  ++steps_;
  read();
  EnvStep out;
  out.state = observe();
  out.reward = reward(config_.reward, last_temperature());
  out.done = steps_ >= config_.episode_steps;
  return out;
}

double FurnaceEnv::controlled_power() const {
  return state_.zone_powers[static_cast<std::size_t>(config_.zone - 1)];
}

void FurnaceEnv::read() {
  last_temps_.resize(positions_.size());
  for (std::size_t i = 0; i < positions_.size(); ++i) last_temps_[i] = twin_.temperature_at(state_, positions_[i]);
}

Eigen::VectorXd FurnaceEnv::observe() const {
  return native_observation(last_temps_, controlled_power(), config_.normalize, config_.norm);
}

}  // namespace forgeline::drl
