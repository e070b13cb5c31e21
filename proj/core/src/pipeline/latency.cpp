#include "forgeline/pipeline/latency.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <nlohmann/json.hpp>

#include "forgeline/common/error.hpp"

namespace forgeline::pipeline {

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::TelemetryParser: return "TelemetryParser";
    case Stage::PowerControl: return "PowerControl";
    case Stage::DataManager: return "DataManager";
  }
  return "?";
}

namespace {

Stage stage_from_string(std::string_view text) {
  for (Stage s : {Stage::TelemetryParser, Stage::PowerControl, Stage::DataManager}) {
    if (to_string(s) == text) return s;
  }
  throw ConfigError("unknown stage '" + std::string(text) + "'");
}

}  // namespace

double default_budget_ms(Stage stage) {
  switch (stage) {
    case Stage::TelemetryParser: return kParserBudgetMs;
    case Stage::PowerControl: return kPowerControlBudgetMs;
    case Stage::DataManager: return kDataManagerBudgetMs;
  }
  return 0.0;
}

double reference_mean_ms(Stage stage) {
  switch (stage) {
    case Stage::TelemetryParser: return 4.622;
    case Stage::PowerControl: return 4.055;
    case Stage::DataManager: return 9.922;
  }
  return 0.0;
}

void LatencySamples::add(double ms) {
  std::lock_guard lock(mutex_);
  values_.push_back(ms);
}

std::vector<double> LatencySamples::values() const {
  std::lock_guard lock(mutex_);
  return values_;
}

std::size_t LatencySamples::size() const {
  std::lock_guard lock(mutex_);
  return values_.size();
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  if (!(p > 0.0 && p <= 100.0)) throw ConfigError("percentile must be in (0, 100]");
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(values.size())));
  return values[std::max<std::size_t>(rank, 1) - 1];
}

LatencyReport make_report(Stage stage, const std::vector<double>& samples_ms, double budget_ms) {
  LatencyReport r;
  r.stage = stage;
  r.samples = samples_ms.size();
  r.budget_ms = budget_ms;
  r.reference_ms = reference_mean_ms(stage);
  if (!samples_ms.empty()) {
    r.mean_ms = std::accumulate(samples_ms.begin(), samples_ms.end(), 0.0) / static_cast<double>(samples_ms.size());
    r.p99_ms = percentile(samples_ms, 99.0);
    r.max_ms = *std::max_element(samples_ms.begin(), samples_ms.end());
  }
  r.pass = r.mean_ms <= r.budget_ms;
  return r;
}

LatencyReport make_report(Stage stage, const std::vector<double>& samples_ms) {
  return make_report(stage, samples_ms, default_budget_ms(stage));
}

void to_json(nlohmann::json& j, const LatencyReport& r) {
  j = {{"stage", to_string(r.stage)}, {"samples", r.samples}, {"mean_ms", r.mean_ms}, {"p99_ms", r.p99_ms},
       {"max_ms", r.max_ms},          {"budget_ms", r.budget_ms}, {"verdict", r.pass ? "pass" : "fail"}};
  j["reference_ms"] = r.reference_ms ? nlohmann::json(*r.reference_ms) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, LatencyReport& r) {
  r.stage = stage_from_string(j.at("stage").get<std::string>());
  r.samples = j.at("samples").get<std::size_t>();
  r.mean_ms = j.at("mean_ms").get<double>();
  r.p99_ms = j.at("p99_ms").get<double>();
  r.max_ms = j.at("max_ms").get<double>();
  r.budget_ms = j.at("budget_ms").get<double>();
  r.pass = j.at("verdict").get<std::string>() == "pass";
  r.reference_ms.reset();
  if (j.contains("reference_ms") && !j["reference_ms"].is_null()) r.reference_ms = j["reference_ms"].get<double>();
}

std::string format_table(const std::vector<LatencyReport>& reports) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-16s %8s %11s %11s %11s %11s %13s %7s\n", "stage", "samples", "budget_ms",
                "actual_ms", "p99_ms", "max_ms", "reference_ms", "verdict");
  out += line;
  for (const auto& r : reports) {
    char ref[32] = "-";
    if (r.reference_ms) std::snprintf(ref, sizeof ref, "%.3f", *r.reference_ms);
    std::snprintf(line, sizeof line, "%-16s %8zu %11.3f %11.3f %11.3f %11.3f %13s %7s\n",
                  std::string(to_string(r.stage)).c_str(), r.samples, r.budget_ms, r.mean_ms, r.p99_ms, r.max_ms, ref,
                  r.pass ? "pass" : "fail");
    out += line;
  }
  out += "(in-process time only; network latency to the plant is not included)\n";
  return out;
}

}  // namespace forgeline::pipeline
