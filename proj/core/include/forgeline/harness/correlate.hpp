#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "forgeline/harness/grid.hpp"

namespace forgeline::harness {

inline constexpr double kSignificantCorrelation = 0.15;

/// Pearson coefficient; nullopt for fewer than two points or a constant input.
std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y);

struct CorrelationRow {
  std::string hyperparameter;
  std::optional<double> r;  // n/a when the column is constant
  bool significant = false;  // |r| > 0.15
};

struct ValueMean {
  std::string value;
  std::size_t jobs = 0;
  double mean_score = 0.0;
};

struct CorrelationReport {
  std::size_t jobs = 0;
  std::vector<CorrelationRow> rows;
  std::map<std::string, std::vector<ValueMean>> value_means;  // per hyperparameter, ascending value
};

/// Correlates every hyperparameter column with the best score. Booleans map to
/// {0, 1}; strings to their rank among the distinct values. Failed jobs are skipped.
CorrelationReport correlate(const std::vector<GridRow>& rows);

void to_json(nlohmann::json& j, const CorrelationReport& r);
std::string format_report(const CorrelationReport& r);

}  // namespace forgeline::harness
