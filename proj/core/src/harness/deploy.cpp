#include "forgeline/harness/deploy.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "forgeline/common/error.hpp"
#include "forgeline/control/manager.hpp"
#include "forgeline/drl/checkpoint.hpp"

namespace forgeline::harness {

void Workspace::load(fabric::Stores& stores) const {
  if (std::filesystem::is_directory(dir_ / "algorithms")) stores.algorithms.load_dir(dir_ / "algorithms");
  const auto cfg = dir_ / "power_config.json";
  if (std::filesystem::exists(cfg)) {
    std::ifstream in(cfg);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("cannot parse " + cfg.string() + ": " + e.what());
    }
    stores.power_config.from_json(j);
  }
}

void Workspace::save(const fabric::Stores& stores) const {
  std::filesystem::create_directories(dir_ / "algorithms");
  stores.algorithms.save_dir(dir_ / "algorithms");
  std::ofstream out(dir_ / "power_config.json");
  out << stores.power_config.to_json().dump(2) << '\n';
  if (!out) throw Error("cannot write " + (dir_ / "power_config.json").string());
}

DeployResult deploy(fabric::Stores& stores, const DeployOptions& options) {
  drl::Checkpoint checkpoint = drl::load_checkpoint(options.checkpoint);
  if (options.zone) checkpoint.env.zone = *options.zone;
  if (options.sensor_mode) checkpoint.env.sensor_mode = *options.sensor_mode;
  DeployResult result;
  result.model = control::wrap_checkpoint(checkpoint);
  result.version = stores.algorithms.put(control::to_bundle(result.model));
  if (options.activate) stores.power_config.set(*options.activate, {std::string(control::kDrlManager), result.version});
  return result;
}

}  // namespace forgeline::harness
