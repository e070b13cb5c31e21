#pragma once

#include <array>

#include "forgeline/common/zones.hpp"

namespace forgeline::control {

/// ceil(v_old * sqrt(p_new / p_old)) computed exactly for double inputs.
/// Requires v_old > 0, p_old > 0, p_new >= 0; throws UndefinedRatioError when
/// p_old is zero and p_new positive.
double voltage_for_power_change(double v_old, double p_old, double p_new);

struct VoltageVector {
  ZoneVector voltages{};
  std::array<bool, kZoneCount> undefined{};  // zone skipped: zero old power

  bool any_undefined() const;
};

/// Per-zone application of voltage_for_power_change. Zones with an undefined
/// ratio keep their old voltage and are flagged.
VoltageVector power_to_voltage(const ZoneVector& v_old, const ZoneVector& p_old, const ZoneVector& p_new);

}  // namespace forgeline::control
