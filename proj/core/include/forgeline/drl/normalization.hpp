#pragma once

#include <nlohmann/json_fwd.hpp>

namespace forgeline::drl {

/// Min-max bounds mapping temperatures and powers into [0, 1].
struct NormBounds {
  double temp_min_c = 0.0;
  double temp_max_c = 1400.0;
  double power_min_kw = 0.0;
  double power_max_kw = 600.0;

  double temperature(double t_c) const { return (t_c - temp_min_c) / (temp_max_c - temp_min_c); }
  double power(double p_kw) const { return (p_kw - power_min_kw) / (power_max_kw - power_min_kw); }

  bool operator==(const NormBounds&) const = default;
};

void validate(const NormBounds& bounds);

void to_json(nlohmann::json& j, const NormBounds& b);
void from_json(const nlohmann::json& j, NormBounds& b);

}  // namespace forgeline::drl
