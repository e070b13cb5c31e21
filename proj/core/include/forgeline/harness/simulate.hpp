#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "forgeline/twin/twin.hpp"

namespace forgeline::harness {

/// "noop" (no actions), "hold", "max_power" (increase every zone) or "min_power".
twin::Controller scripted_controller(std::string_view name);

/// Twin settings for a run of `steps`: defaults plus `overrides`. Without an
/// explicit layout_offset_m the furnace is placed far enough down the track for
/// the rod to stay on it.
twin::TwinConfig simulation_twin_config(const nlohmann::json& overrides, int steps);

struct SimulateOptions {
  twin::TwinConfig twin = twin::default_twin_config();
  int steps = 100;
  std::string controller = "noop";
};

struct SimulateSummary {
  int steps = 0;
  double min_c = 0.0;  // zone-3 last forge sensor
  double max_c = 0.0;
  double mean_c = 0.0;
  std::optional<std::string> error;
};

struct SimulateResult {
  twin::FurnaceState initial;
  twin::Trajectory trajectory;
  SimulateSummary summary;
};

/// One rod at ambient temperature reaching from the track origin to the furnace exit.
SimulateResult simulate(const SimulateOptions& options);

void to_json(nlohmann::json& j, const SimulateSummary& s);

}  // namespace forgeline::harness
