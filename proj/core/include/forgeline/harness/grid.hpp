#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "forgeline/harness/job.hpp"

namespace forgeline::harness {

/// Cartesian grid over agent config keys on top of a base job.
struct GridSpec {
  JobSpec base;
  std::vector<std::pair<std::string, std::vector<nlohmann::json>>> axes;  // config key -> values
  std::optional<std::size_t> budget;  // sample this many combinations when the grid is larger
  std::uint64_t sample_seed = 0;
  int workers = 1;
};

/// {"base": job spec, "axes": {key: [values]}, "budget": n, "sample_seed": s, "workers": w}
GridSpec grid_from_json(const nlohmann::json& j);
GridSpec load_grid(const std::filesystem::path& path);

/// Product of the axis sizes.
std::size_t grid_size(const GridSpec& grid);

/// Indices of the combinations to run: all of them when the budget covers the
/// grid, otherwise a seeded uniform sample without replacement, ascending.
std::vector<std::size_t> select_combinations(const GridSpec& grid);

/// Axis values of combination `index` (first axis varies slowest).
std::vector<std::pair<std::string, nlohmann::json>> combination(const GridSpec& grid, std::size_t index);

/// Every selected job, validated in grid mode before anything runs.
std::vector<JobSpec> expand_grid(const GridSpec& grid);

struct GridRow {
  std::size_t job_id = 0;
  std::vector<std::pair<std::string, nlohmann::json>> hyperparameters;
  double best_score = 0.0;
  double final_score = 0.0;
  double last10_score = 0.0;
  std::optional<std::string> error;
};

using GridProgress = std::function<void(const GridRow&)>;

/// Runs the selected jobs on `grid.workers` threads. With `out_dir` set, each
/// job's outputs go to out_dir/job-<id>.
std::vector<GridRow> run_grid(const GridSpec& grid, const std::optional<std::filesystem::path>& out_dir = {},
                              const GridProgress& progress = {});

/// Columns: job_id, one per hyperparameter, best_score, final_score, last10_score, error.
void write_results_csv(const std::filesystem::path& path, const std::vector<GridRow>& rows);
std::vector<GridRow> read_results_csv(const std::filesystem::path& path);

}  // namespace forgeline::harness
