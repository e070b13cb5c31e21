#pragma once

#include <span>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

namespace forgeline::drl {

enum class RewardFamily { Symmetric, Asymmetric, Hyperbolic };

std::string_view to_string(RewardFamily family);
RewardFamily reward_family_from_string(std::string_view text);

/// Reward shaped around the zone-3 exit temperature.
struct RewardSpec {
  RewardFamily family = RewardFamily::Symmetric;
  double target_c = 1207.5;
  double half_band_c = 67.5;
  double over_weight = 2.0;  // asymmetric only

  double band_min() const { return target_c - half_band_c; }
  double band_max() const { return target_c + half_band_c; }
};

void validate(const RewardSpec& spec);

/// Symmetric: 1 - |e|/D clipped to [-1, 1]. Asymmetric: same with e scaled by
/// over_weight above target. Hyperbolic: 1 / (1 + |e|/D).
double reward(const RewardSpec& spec, double t_last_c);

/// Mean of the rewards for the hyperbolic family, sum otherwise. Empty episodes score 0.
double episode_score(const RewardSpec& spec, std::span<const double> rewards);

void to_json(nlohmann::json& j, const RewardSpec& s);
void from_json(const nlohmann::json& j, RewardSpec& s);

}  // namespace forgeline::drl
