#include "forgeline/harness/correlate.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include <nlohmann/json.hpp>

#include "forgeline/common/error.hpp"

namespace forgeline::harness {

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DimensionError("pearson inputs differ in length");
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

namespace {

struct Encoded {
  std::vector<double> numbers;
  std::vector<std::string> labels;
};

Encoded encode(const std::vector<nlohmann::json>& column) {
  Encoded e;
  bool all_numeric = true;
  for (const auto& v : column) {
    if (!(v.is_number() || v.is_boolean())) all_numeric = false;
    e.labels.push_back(v.is_string() ? v.get<std::string>() : v.dump());
  }
  if (all_numeric) {
    for (const auto& v : column) e.numbers.push_back(v.is_boolean() ? (v.get<bool>() ? 1.0 : 0.0) : v.get<double>());
    return e;
  }
  std::set<std::string> distinct(e.labels.begin(), e.labels.end());
  for (const auto& l : e.labels) {
    e.numbers.push_back(static_cast<double>(std::distance(distinct.begin(), distinct.find(l))));
  }
  return e;
}

}  // namespace

CorrelationReport correlate(const std::vector<GridRow>& rows) {
  std::vector<const GridRow*> ok;
  for (const auto& r : rows) {
    if (!r.error) ok.push_back(&r);
  }
  if (ok.size() < 3) throw ConfigError("correlation needs at least 3 successful jobs");
  CorrelationReport report;
  report.jobs = ok.size();
  std::vector<double> scores;
  for (const auto* r : ok) scores.push_back(r->best_score);

  const auto& first = ok.front()->hyperparameters;
  for (std::size_t h = 0; h < first.size(); ++h) {
    const std::string& name = first[h].first;
    std::vector<nlohmann::json> column;
    for (const auto* r : ok) {
      if (r->hyperparameters.size() != first.size() || r->hyperparameters[h].first != name) {
        throw ConfigError("grid results have inconsistent hyperparameter columns");
      }
      column.push_back(r->hyperparameters[h].second);
    }
    const Encoded e = encode(column);
    CorrelationRow row{name, pearson(e.numbers, scores), false};
    row.significant = row.r && std::abs(*row.r) > kSignificantCorrelation;
    report.rows.push_back(row);

    std::map<double, ValueMean> means;
    for (std::size_t i = 0; i < column.size(); ++i) {
      ValueMean& m = means[e.numbers[i]];
      m.value = e.labels[i];
      ++m.jobs;
      m.mean_score += scores[i];
    }
    auto& table = report.value_means[name];
    for (auto& [_, m] : means) {
      m.mean_score /= static_cast<double>(m.jobs);
      table.push_back(m);
    }
  }
  return report;
}

void to_json(nlohmann::json& j, const CorrelationReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"hyperparameter", row.hyperparameter},
                    {"r", row.r ? nlohmann::json(*row.r) : nlohmann::json(nullptr)},
                    {"significant", row.significant}});
  }
  nlohmann::json means = nlohmann::json::object();
  for (const auto& [name, table] : r.value_means) {
    nlohmann::json t = nlohmann::json::array();
    for (const auto& m : table) t.push_back({{"value", m.value}, {"jobs", m.jobs}, {"mean_score", m.mean_score}});
    means[name] = t;
  }
  j = {{"jobs", r.jobs}, {"threshold", kSignificantCorrelation}, {"correlations", rows}, {"value_means", means}};
}

std::string format_report(const CorrelationReport& r) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-24s %10s %s\n", "hyperparameter", "r", "significant");
  out += line;
  for (const auto& row : r.rows) {
    char rv[32] = "n/a";
    if (row.r) std::snprintf(rv, sizeof rv, "%.4f", *row.r);
    std::snprintf(line, sizeof line, "%-24s %10s %s\n", row.hyperparameter.c_str(), rv, row.significant ? "*" : "");
    out += line;
  }
  for (const auto& [name, table] : r.value_means) {
    if (table.size() < 2) continue;
    out += "\n";
    std::snprintf(line, sizeof line, "%-16s %6s %12s\n", name.c_str(), "jobs", "mean_score");
    out += line;
    for (const auto& m : table) {
      std::snprintf(line, sizeof line, "%-16s %6zu %12.4f\n", m.value.c_str(), m.jobs, m.mean_score);
      out += line;
    }
  }
  return out;
}

}  // namespace forgeline::harness
