#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "forgeline/drl/reward.hpp"
#include "forgeline/drl/train.hpp"

namespace forgeline::harness {

struct SeriesRow {
  int step = 0;
  double t_last_c = 0.0;
  double power_kw = 0.0;
  double band_min_c = 0.0;
  double band_max_c = 0.0;
};

/// Plot-ready temperature/power series for one episode of a step trace
/// (default: the last episode present).
std::vector<SeriesRow> episode_series(const std::vector<drl::StepTrace>& trace, const drl::RewardSpec& reward,
                                      std::optional<int> episode = std::nullopt);

/// Header: step,t_last_c,power_kw,band_min_c,band_max_c
void write_series_csv(const std::filesystem::path& path, const std::vector<SeriesRow>& rows);

}  // namespace forgeline::harness
