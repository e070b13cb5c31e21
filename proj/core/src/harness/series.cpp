#include "forgeline/harness/series.hpp"

#include <fstream>

#include "forgeline/common/error.hpp"

namespace forgeline::harness {

std::vector<SeriesRow> episode_series(const std::vector<drl::StepTrace>& trace, const drl::RewardSpec& reward,
                                      std::optional<int> episode) {
  if (trace.empty()) throw ConfigError("step trace is empty");
  const int ep = episode.value_or(trace.back().episode);
  std::vector<SeriesRow> rows;
  for (const auto& t : trace) {
    if (t.episode == ep) rows.push_back({t.step, t.t_last_c, t.power_kw, reward.band_min(), reward.band_max()});
  }
  if (rows.empty()) throw ConfigError("episode " + std::to_string(ep) + " is not in the trace");
  return rows;
}

void write_series_csv(const std::filesystem::path& path, const std::vector<SeriesRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "step,t_last_c,power_kw,band_min_c,band_max_c\n";
  out.precision(12);
  for (const auto& r : rows) {
    out << r.step << ',' << r.t_last_c << ',' << r.power_kw << ',' << r.band_min_c << ',' << r.band_max_c << '\n';
  }
  if (!out) throw Error("cannot write " + path.string());
}

}  // namespace forgeline::harness
