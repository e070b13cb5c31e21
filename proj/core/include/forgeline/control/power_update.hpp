#pragma once

#include <array>
#include <cstdint>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "forgeline/common/mode.hpp"
#include "forgeline/common/zones.hpp"
#include "forgeline/twin/twin.hpp"

namespace forgeline::control {

std::string_view to_string(twin::PowerAction action);

struct Provenance {
  std::string manager_id;
  std::string version;
  std::int64_t snapshot_time_ns = 0;
  std::uint64_t snapshot_seq = 0;

  bool operator==(const Provenance&) const = default;
};

/// Voltage command for all five zones.
struct PowerUpdate {
  Mode mode = Mode::NormalProduction;
  ZoneVector old_voltages{};
  ZoneVector new_voltages{};
  ZoneVector old_powers{};
  ZoneVector new_powers{};
  twin::ZoneActions actions{};
  std::array<bool, kZoneCount> undefined_ratio{};
  Provenance provenance;
  std::int64_t decided_ns = 0;

  bool operator==(const PowerUpdate&) const = default;
};

void to_json(nlohmann::json& j, const PowerUpdate& u);
void from_json(const nlohmann::json& j, PowerUpdate& u);

struct SanityLimits {
  double min_voltage = 1.0;
  double max_voltage = 400.0;
  double max_delta = 350.0;  // per zone, per update
};

struct SanityResult {
  bool accepted = true;
  std::string rule;  // "non_finite", "voltage_bound" or "max_delta" on reject
  std::string detail;
};

SanityResult sanity_check(const PowerUpdate& update, const SanityLimits& limits);

/// Powers after applying per-zone actions: +/- step, or the lower bound on drop, clamped.
ZoneVector apply_actions(const ZoneVector& powers, const twin::ZoneActions& actions, double step,
                         std::pair<double, double> bounds);

}  // namespace forgeline::control
