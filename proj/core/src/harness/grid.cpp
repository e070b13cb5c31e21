#include "forgeline/harness/grid.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "forgeline/common/error.hpp"

namespace forgeline::harness {

namespace {

std::set<std::string> config_keys(const JobSpec& job) {
  nlohmann::json j;
  std::visit([&](const auto& c) { j = c; }, job.config);
  std::set<std::string> keys;
  for (const auto& [k, _] : j.items()) keys.insert(k);
  return keys;
}

std::string cell(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

nlohmann::json parse_cell(const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception&) {
    return text;
  }
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

}  // namespace

GridSpec grid_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("grid spec must be a JSON object");
  GridSpec g;
  try {
    g.base = job_from_json(j.value("base", nlohmann::json::object()));
    if (!j.contains("axes") || !j["axes"].is_object()) throw ConfigError("grid spec needs an 'axes' object");
    const auto keys = config_keys(g.base);
    for (const auto& [k, v] : j["axes"].items()) {
      if (!keys.contains(k)) throw ConfigError("grid axis '" + k + "' is not a config key");
      if (!v.is_array()) throw ConfigError("grid axis '" + k + "' must be an array");
      std::vector<nlohmann::json> values(v.begin(), v.end());
      g.axes.emplace_back(k, std::move(values));
    }
    if (j.contains("budget") && !j["budget"].is_null()) g.budget = j["budget"].get<std::size_t>();
    g.sample_seed = j.value("sample_seed", std::uint64_t{0});
    g.workers = j.value("workers", 1);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed grid spec: ") + e.what());
  }
  if (g.axes.empty()) throw ConfigError("grid has no axes");
  if (grid_size(g) == 0) throw ConfigError("grid is empty");
  if (g.workers < 1) throw ConfigError("grid workers must be >= 1");
  if (g.budget && *g.budget == 0) throw ConfigError("grid budget must be >= 1");
  return g;
}

GridSpec load_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read grid spec " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("grid spec " + path.string() + " is not valid JSON: " + e.what());
  }
  return grid_from_json(j);
}

std::size_t grid_size(const GridSpec& grid) {
  if (grid.axes.empty()) return 0;
  std::size_t n = 1;
  for (const auto& [_, values] : grid.axes) n *= values.size();
  return n;
}

std::vector<std::size_t> select_combinations(const GridSpec& grid) {
  const std::size_t n = grid_size(grid);
  if (n == 0) throw ConfigError("grid is empty");
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (!grid.budget || *grid.budget >= n) return all;
  std::mt19937_64 rng(grid.sample_seed);
  // partial Fisher-Yates
  for (std::size_t i = 0; i < *grid.budget; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(all[i], all[pick(rng)]);
  }
  all.resize(*grid.budget);
  std::sort(all.begin(), all.end());
  return all;
}

std::vector<std::pair<std::string, nlohmann::json>> combination(const GridSpec& grid, std::size_t index) {
  std::vector<std::pair<std::string, nlohmann::json>> out(grid.axes.size());
  for (std::size_t a = grid.axes.size(); a-- > 0;) {
    const auto& [key, values] = grid.axes[a];
    out[a] = {key, values[index % values.size()]};
    index /= values.size();
  }
  return out;
}

std::vector<JobSpec> expand_grid(const GridSpec& grid) {
  std::vector<JobSpec> jobs;
  std::vector<std::string> problems;
  for (std::size_t idx : select_combinations(grid)) {
    nlohmann::json cfg;
    std::visit([&](const auto& c) { cfg = c; }, grid.base.config);
    for (const auto& [k, v] : combination(grid, idx)) cfg[k] = v;
    nlohmann::json spec = grid.base;
    spec["config"] = cfg;
    try {
      JobSpec job = job_from_json(spec);
      validate(job, true);
      jobs.push_back(std::move(job));
    } catch (const ConfigError& e) {
      problems.push_back("combination " + std::to_string(idx) + ": " + e.what());
    }
  }
  if (!problems.empty()) {
    std::string msg = "grid rejected before running:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }
  return jobs;
}

std::vector<GridRow> run_grid(const GridSpec& grid, const std::optional<std::filesystem::path>& out_dir,
                              const GridProgress& progress) {
  const std::vector<JobSpec> jobs = expand_grid(grid);
  const std::vector<std::size_t> indices = select_combinations(grid);
  std::vector<GridRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      GridRow& row = rows[i];
      row.job_id = i;
      row.hyperparameters = combination(grid, indices[i]);
      try {
        JobResult r = run_job(jobs[i], true);
        row.best_score = r.best_score();
        row.final_score = r.final_score();
        row.last10_score = r.tail_mean(10);
        row.error = r.error;
        if (out_dir) write_job_outputs(*out_dir / ("job-" + std::to_string(i)), jobs[i], r);
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(row);
      }
    }
  };
  const int n = std::min<int>(grid.workers, static_cast<int>(jobs.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

void write_results_csv(const std::filesystem::path& path, const std::vector<GridRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "job_id";
  if (!rows.empty()) {
    for (const auto& [k, _] : rows.front().hyperparameters) out << ',' << k;
  }
  out << ",best_score,final_score,last10_score,error\n";
  out.precision(17);
  for (const GridRow& r : rows) {
    out << r.job_id;
    for (const auto& [_, v] : r.hyperparameters) out << ',' << quote(cell(v));
    out << ',' << r.best_score << ',' << r.final_score << ',' << r.last10_score << ',' << quote(r.error.value_or(""))
        << '\n';
  }
  if (!out) throw Error("cannot write " + path.string());
}

std::vector<GridRow> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path.string() + " is empty");
  const auto header = split_csv(line);
  auto col = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ConfigError(path.string() + " lacks column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t id_col = col("job_id");
  const std::size_t best_col = col("best_score");
  const std::size_t final_col = col("final_score");
  const std::size_t last_col = col("last10_score");
  const std::size_t err_col = col("error");
  std::vector<std::size_t> hp_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != id_col && c != best_col && c != final_col && c != last_col && c != err_col) hp_cols.push_back(c);
  }
  std::vector<GridRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != header.size()) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(header.size()) + " fields");
    }
    GridRow r;
    try {
      r.job_id = std::stoul(f[id_col]);
      r.best_score = std::stod(f[best_col]);
      r.final_score = std::stod(f[final_col]);
      r.last10_score = std::stod(f[last_col]);
    } catch (const std::logic_error&) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": malformed number");
    }
    if (!f[err_col].empty()) r.error = f[err_col];
    for (std::size_t c : hp_cols) r.hyperparameters.emplace_back(header[c], parse_cell(f[c]));
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace forgeline::harness
