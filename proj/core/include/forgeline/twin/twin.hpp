#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "forgeline/common/zones.hpp"
#include "forgeline/twin/config.hpp"
#include "forgeline/twin/rod.hpp"

namespace forgeline::twin {

enum class PowerAction { Increase, Decrease, NoChange, DropToLow };

using ZoneActions = std::array<PowerAction, kZoneCount>;

struct FurnaceState {
  std::int64_t clock = 0;
  std::vector<Rod> rods;
  ZoneVector zone_powers{};
  ZoneVector zone_voltages{};
  Mode mode = Mode::NormalProduction;
  std::string material_id = "default";
  int clamped_actions = 0;  // power changes cut short by power_bounds

  bool operator==(const FurnaceState&) const = default;
};

struct SensorReadout {
  std::vector<double> temps;
  ZoneVector powers{};
  std::vector<double> positions;
};

struct StepResult {
  FurnaceState state;
  SensorReadout readout;
};

/// Called once per step with the current state; returns the actions to apply.
using Controller = std::function<std::optional<ZoneActions>(const FurnaceState&)>;

struct Trajectory {
  std::vector<StepResult> steps;
  std::optional<std::string> error;  // set when the controller aborted the run
};

/// Discrete-time twin built from cooperating managers: the controller manager
/// adjusts zone powers, the movement and warmholding managers move the rods, the
/// temperature manager heats or cools each segment and the sensor manager
/// samples the profile.
class FurnaceTwin {
 public:
  explicit FurnaceTwin(TwinConfig config);

  const TwinConfig& config() const { return config_; }

  FurnaceState init(std::vector<Rod> rods) const;

  StepResult step(const FurnaceState& state,
                  const std::optional<ZoneActions>& actions = std::nullopt) const;

  /// In-place variant of step() without building a readout.
  void advance(FurnaceState& state, const std::optional<ZoneActions>& actions = std::nullopt) const;

  Trajectory run(const FurnaceState& state, const Controller& controller, int steps) const;

  SensorReadout read_sensors(const FurnaceState& state) const;
  SensorReadout read_sensors(const FurnaceState& state, std::span<const double> positions) const;

  /// Temperature seen at `position_m`: the covering segment, or ambient over an empty track.
  double temperature_at(const FurnaceState& state, double position_m) const;

  /// Zone (1-based) of the live coil covering `position_m`, or 0 outside coils.
  int zone_at(double position_m) const;

  double voltage_for_power(double power_kw) const;
  double power_for_voltage(double voltage) const;

  /// Sets zone powers directly, clamped to power_bounds; voltages follow.
  void set_zone_powers(FurnaceState& state, const ZoneVector& powers) const;

  std::vector<double> readout_positions() const;

 private:
  void apply_controller(FurnaceState& state, const ZoneActions& actions) const;
  void apply_movement(FurnaceState& state) const;
  void apply_temperature(FurnaceState& state) const;

  TwinConfig config_;
  std::vector<Coil> coils_;  // sorted by start
};

}  // namespace forgeline::twin
