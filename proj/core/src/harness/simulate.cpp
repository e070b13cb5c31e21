#include "forgeline/harness/simulate.hpp"

#include <algorithm>
#include <limits>

#include <nlohmann/json.hpp>

#include "forgeline/common/error.hpp"

namespace forgeline::harness {

twin::Controller scripted_controller(std::string_view name) {
  auto all = [](twin::PowerAction a) {
    return [a](const twin::FurnaceState&) -> std::optional<twin::ZoneActions> {
      twin::ZoneActions acts;
      acts.fill(a);
      return acts;
    };
  };
  if (name == "noop") return {};
  if (name == "hold") return all(twin::PowerAction::NoChange);
  if (name == "max_power") return all(twin::PowerAction::Increase);
  if (name == "min_power") return all(twin::PowerAction::Decrease);
  throw ConfigError("unknown controller '" + std::string(name) + "' (noop, hold, max_power, min_power)");
}

twin::TwinConfig simulation_twin_config(const nlohmann::json& overrides, int steps) {
  if (steps < 1) throw ConfigError("steps must be >= 1");
  nlohmann::json j = overrides.is_null() ? nlohmann::json::object() : overrides;
  twin::TwinConfig c = twin::default_twin_config();
  if (!j.contains("layout_offset_m")) {
    const double v = j.value("rod_velocity", c.rod_velocity);
    j["layout_offset_m"] = v * steps + 1.0;
  }
  from_json(j, c);
  twin::validate(c);
  return c;
}

SimulateResult simulate(const SimulateOptions& options) {
  if (options.steps < 1) throw ConfigError("steps must be >= 1");
  twin::FurnaceTwin furnace(options.twin);
  const twin::TwinConfig& tc = furnace.config();
  const double front = tc.furnace_end();
  SimulateResult result;
  result.initial = furnace.init({twin::make_rod("rod-1", front, front, tc.ambient_temp, tc.segment_length)});
  result.trajectory = furnace.run(result.initial, scripted_controller(options.controller), options.steps);

  const double probe = tc.sensor_positions_forge.at(forge_sensor_offset(3) + kForgeSensorsPerZone[2] - 1);
  SimulateSummary& s = result.summary;
  s.error = result.trajectory.error;
  s.steps = static_cast<int>(result.trajectory.steps.size());
  s.min_c = std::numeric_limits<double>::infinity();
  s.max_c = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (const auto& step : result.trajectory.steps) {
    const double t = furnace.temperature_at(step.state, probe);
    s.min_c = std::min(s.min_c, t);
    s.max_c = std::max(s.max_c, t);
    sum += t;
  }
  if (s.steps > 0) {
    s.mean_c = sum / s.steps;
  } else {
    s.min_c = s.max_c = 0.0;
  }
  return result;
}

void to_json(nlohmann::json& j, const SimulateSummary& s) {
  j = {{"steps", s.steps}, {"zone3_last_min_c", s.min_c}, {"zone3_last_max_c", s.max_c},
       {"zone3_last_mean_c", s.mean_c}};
  j["error"] = s.error ? nlohmann::json(*s.error) : nlohmann::json(nullptr);
}

}  // namespace forgeline::harness
