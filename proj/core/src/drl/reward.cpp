#include "forgeline/drl/reward.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <nlohmann/json.hpp>

#include "forgeline/common/error.hpp"

namespace forgeline::drl {

std::string_view to_string(RewardFamily family) {
  switch (family) {
    case RewardFamily::Symmetric: return "symmetric";
    case RewardFamily::Asymmetric: return "asymmetric";
    case RewardFamily::Hyperbolic: return "hyperbolic";
  }
  return "symmetric";
}

RewardFamily reward_family_from_string(std::string_view text) {
  if (text == "symmetric") return RewardFamily::Symmetric;
  if (text == "asymmetric") return RewardFamily::Asymmetric;
  if (text == "hyperbolic") return RewardFamily::Hyperbolic;
  throw ConfigError("unknown reward family '" + std::string(text) + "'");
}

void validate(const RewardSpec& s) {
  if (!std::isfinite(s.target_c)) throw ConfigError("reward target must be finite");
  if (!(s.half_band_c > 0.0) || !std::isfinite(s.half_band_c)) throw ConfigError("reward half band must be > 0");
  if (s.family == RewardFamily::Asymmetric && !(s.over_weight > 1.0)) {
    throw ConfigError("asymmetric reward needs over_weight > 1");
  }
}

double reward(const RewardSpec& s, double t) {
  const double err = std::abs(t - s.target_c) / s.half_band_c;
  switch (s.family) {
    case RewardFamily::Symmetric:
      return std::clamp(1.0 - err, -1.0, 1.0);
    case RewardFamily::Asymmetric: {
      const double weighted = t > s.target_c ? s.over_weight * err : err;
      return std::clamp(1.0 - weighted, -1.0, 1.0);
    }
    case RewardFamily::Hyperbolic:
      return 1.0 / (1.0 + err);
  }
  return 0.0;
}

double episode_score(const RewardSpec& s, std::span<const double> rewards) {
  if (rewards.empty()) return 0.0;
  const double sum = std::accumulate(rewards.begin(), rewards.end(), 0.0);
  return s.family == RewardFamily::Hyperbolic ? sum / static_cast<double>(rewards.size()) : sum;
}

void to_json(nlohmann::json& j, const RewardSpec& s) {
  j = {{"family", std::string(to_string(s.family))},
       {"target_c", s.target_c},
       {"half_band_c", s.half_band_c},
       {"over_weight", s.over_weight}};
}

void from_json(const nlohmann::json& j, RewardSpec& s) {
  if (j.contains("family")) s.family = reward_family_from_string(j.at("family").get<std::string>());
  s.target_c = j.value("target_c", s.target_c);
  s.half_band_c = j.value("half_band_c", s.half_band_c);
  s.over_weight = j.value("over_weight", s.over_weight);
}

}  // namespace forgeline::drl
