#pragma once

#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace forgeline::pipeline {

enum class Stage { TelemetryParser, PowerControl, DataManager };

std::string_view to_string(Stage stage);

inline constexpr double kParserBudgetMs = 5.0;
inline constexpr double kPowerControlBudgetMs = 1000.0;
inline constexpr double kDataManagerBudgetMs = 1000.0;

double default_budget_ms(Stage stage);
/// Means measured on the production deployment, shown next to ours.
double reference_mean_ms(Stage stage);

/// Thread-safe sample sink shared by a service and its reporters.
class LatencySamples {
 public:
  void add(double ms);
  std::vector<double> values() const;
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::vector<double> values_;
};

struct LatencyReport {
  Stage stage = Stage::TelemetryParser;
  std::size_t samples = 0;
  double mean_ms = 0.0;
  double p99_ms = 0.0;
  double max_ms = 0.0;
  double budget_ms = 0.0;
  bool pass = true;  // mean_ms <= budget_ms; vacuous with no samples
  std::optional<double> reference_ms;
};

/// Nearest-rank percentile, p in (0, 100]. Empty input gives 0.
double percentile(std::vector<double> values, double p);

LatencyReport make_report(Stage stage, const std::vector<double>& samples_ms, double budget_ms);
LatencyReport make_report(Stage stage, const std::vector<double>& samples_ms);

void to_json(nlohmann::json& j, const LatencyReport& r);
void from_json(const nlohmann::json& j, LatencyReport& r);

/// Aligned table: stage, budget, actual mean, p99, max, reference, verdict.
std::string format_table(const std::vector<LatencyReport>& reports);

}  // namespace forgeline::pipeline
