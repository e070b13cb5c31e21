#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "forgeline/drl/config.hpp"
#include "forgeline/drl/mlp.hpp"
#include "forgeline/drl/normalization.hpp"
#include "forgeline/drl/reward.hpp"
#include "forgeline/twin/twin.hpp"

namespace forgeline::drl {

struct EnvStep {
  Eigen::VectorXd state;
  double reward = 0.0;
  bool done = false;
};

/// Contract between the training loop and a plant model.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t action_count() const { return 3; }
  virtual Eigen::VectorXd reset() = 0;
  virtual EnvStep step(int action) = 0;
  virtual const RewardSpec& reward_spec() const = 0;
  /// Temperature at the last controlled-zone sensor after the latest reset/step.
  virtual double last_temperature() const = 0;
  virtual double controlled_power() const = 0;
};

enum class Scenario { NormalProduction, AfterWarmholding };

std::string_view to_string(Scenario scenario);
Scenario scenario_from_string(std::string_view text);

/// Training scenario around the furnace twin. One long rod is pushed through the
/// furnace; a warm-up run at the initial powers settles the profile and every
/// episode restarts from that cached state.
struct FurnaceEnvConfig {
  Scenario scenario = Scenario::NormalProduction;
  int zone = 3;
  int episode_steps = 2000;
  int warmup_steps = 0;  // 0: time for the rod to cross the furnace plus margin
  double rod_velocity = 0.4;
  double heating_gain = 0.2;
  twin::SensorMode sensor_mode = twin::SensorMode::Virtual;
  ZoneVector initial_powers{250.0, 250.0, 20.0, 100.0, 100.0};
  bool normalize = true;
  bool z1z2_noise = false;
  double noise_fraction = 0.05;
  NormBounds norm{900.0, 1500.0, 0.0, 200.0};
  RewardSpec reward;
  double zebra_hot_c = 1150.0;
  double zebra_cold_c = 950.0;
  double zebra_band_m = 0.625;

  /// Applies the sensor, normalization and noise flags.
  void apply(const CommonConfig& common);
  int resolved_warmup_steps() const;
};

void validate(const FurnaceEnvConfig& config);
void to_json(nlohmann::json& j, const FurnaceEnvConfig& c);
void from_json(const nlohmann::json& j, FurnaceEnvConfig& c);

/// Native agent input for one zone: sensor temperatures then the zone power.
Eigen::VectorXd native_observation(std::span<const double> temps_c, double power_kw, bool normalize,
                                   const NormBounds& norm);

class FurnaceEnv final : public Environment {
 public:
  FurnaceEnv(FurnaceEnvConfig config, std::uint64_t seed);

  std::size_t state_dim() const override { return positions_.size() + 1; }
  Eigen::VectorXd reset() override;
  EnvStep step(int action) override;
  const RewardSpec& reward_spec() const override { return config_.reward; }
  double last_temperature() const override { return last_temps_.back(); }
  double controlled_power() const override;

  const FurnaceEnvConfig& config() const { return config_; }
  const twin::FurnaceTwin& twin() const { return twin_; }
  const twin::FurnaceState& state() const { return state_; }
  const std::vector<double>& sensor_positions() const { return positions_; }
  const std::vector<double>& last_temps() const { return last_temps_; }
  int steps_taken() const { return steps_; }

  /// The twin configuration the environment drives.
  static twin::TwinConfig make_twin_config(const FurnaceEnvConfig& config);

 private:
  void read();
  Eigen::VectorXd observe() const;

  FurnaceEnvConfig config_;
  twin::FurnaceTwin twin_;
  std::vector<double> positions_;
  twin::FurnaceState start_;
  twin::FurnaceState state_;
  std::vector<double> last_temps_;
  Rng rng_;
  int steps_ = 0;
};

/// Maps action index 0, 1, 2 to decrease, keep, increase.
twin::PowerAction action_from_index(int index);

}  // namespace forgeline::drl
