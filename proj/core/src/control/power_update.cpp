#include "forgeline/control/power_update.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "forgeline/common/error.hpp"

namespace forgeline::control {

std::string_view to_string(twin::PowerAction action) {
  switch (action) {
    case twin::PowerAction::Increase: return "increase";
    case twin::PowerAction::Decrease: return "decrease";
    case twin::PowerAction::NoChange: return "no_change";
    case twin::PowerAction::DropToLow: return "drop";
  }
  return "no_change";
}

namespace {

twin::PowerAction action_from_string(std::string_view text) {
  for (auto a : {twin::PowerAction::Increase, twin::PowerAction::Decrease, twin::PowerAction::NoChange,
                 twin::PowerAction::DropToLow}) {
    if (to_string(a) == text) return a;
  }
  throw ConfigError("unknown power action '" + std::string(text) + "'");
}

}  // namespace

void to_json(nlohmann::json& j, const PowerUpdate& u) {
  nlohmann::json actions = nlohmann::json::array();
  for (auto a : u.actions) actions.push_back(std::string(to_string(a)));
  j = {{"schema", 1},
       {"mode", std::string(forgeline::to_string(u.mode))},
       {"old_voltages", u.old_voltages},
       {"new_voltages", u.new_voltages},
       {"old_powers", u.old_powers},
       {"new_powers", u.new_powers},
       {"actions", actions},
       {"undefined_ratio", u.undefined_ratio},
       {"provenance",
        {{"manager_id", u.provenance.manager_id},
         {"version", u.provenance.version},
         {"snapshot_time_ns", u.provenance.snapshot_time_ns},
         {"snapshot_seq", u.provenance.snapshot_seq}}},
       {"decided_ns", u.decided_ns}};
}

void from_json(const nlohmann::json& j, PowerUpdate& u) {
  u.mode = mode_from_string(j.at("mode").get<std::string>());
  j.at("old_voltages").get_to(u.old_voltages);
  j.at("new_voltages").get_to(u.new_voltages);
  j.at("old_powers").get_to(u.old_powers);
  j.at("new_powers").get_to(u.new_powers);
  const auto& actions = j.at("actions");
  if (!actions.is_array() || actions.size() != kZoneCount) throw ConfigError("power update needs five actions");
  for (std::size_t z = 0; z < kZoneCount; ++z) u.actions[z] = action_from_string(actions[z].get<std::string>());
  j.at("undefined_ratio").get_to(u.undefined_ratio);
  const auto& p = j.at("provenance");
  u.provenance.manager_id = p.at("manager_id").get<std::string>();
  u.provenance.version = p.at("version").get<std::string>();
  u.provenance.snapshot_time_ns = p.at("snapshot_time_ns").get<std::int64_t>();
  u.provenance.snapshot_seq = p.at("snapshot_seq").get<std::uint64_t>();
  u.decided_ns = j.value("decided_ns", std::int64_t{0});
}

SanityResult sanity_check(const PowerUpdate& u, const SanityLimits& limits) {
  for (std::size_t z = 0; z < kZoneCount; ++z) {
    if (!std::isfinite(u.new_voltages[z]) || !std::isfinite(u.old_voltages[z])) {
      return {false, "non_finite", "zone " + std::to_string(z + 1) + " voltage is not finite"};
    }
  }
  for (std::size_t z = 0; z < kZoneCount; ++z) {
    const double v = u.new_voltages[z];
    if (v < limits.min_voltage || v > limits.max_voltage) {
      std::ostringstream msg;
      msg << "zone " << z + 1 << " voltage " << v << " outside [" << limits.min_voltage << ", "
          << limits.max_voltage << "]";
      return {false, "voltage_bound", msg.str()};
    }
  }
  for (std::size_t z = 0; z < kZoneCount; ++z) {
    const double delta = std::abs(u.new_voltages[z] - u.old_voltages[z]);
    if (delta > limits.max_delta) {
      std::ostringstream msg;
      msg << "zone " << z + 1 << " voltage step " << delta << " exceeds " << limits.max_delta;
      return {false, "max_delta", msg.str()};
    }
  }
  return {};
}

ZoneVector apply_actions(const ZoneVector& powers, const twin::ZoneActions& actions, double step,
                         std::pair<double, double> bounds) {
  ZoneVector out = powers;
  for (std::size_t z = 0; z < kZoneCount; ++z) {
    switch (actions[z]) {
      case twin::PowerAction::Increase: out[z] = std::clamp(powers[z] + step, bounds.first, bounds.second); break;
      case twin::PowerAction::Decrease: out[z] = std::clamp(powers[z] - step, bounds.first, bounds.second); break;
      case twin::PowerAction::DropToLow: out[z] = bounds.first; break;
      case twin::PowerAction::NoChange: break;
    }
  }
  return out;
}

}  // namespace forgeline::control
