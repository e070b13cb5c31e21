#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "forgeline/common/mode.hpp"
#include "forgeline/control/wrapper.hpp"
#include "forgeline/fabric/stores.hpp"
#include "forgeline/twin/config.hpp"

namespace forgeline::harness {

/// Directory holding the algorithm store (algorithms/<version>.bundle) and the
/// active selections (power_config.json) between CLI invocations.
class Workspace {
 public:
  explicit Workspace(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path& dir() const { return dir_; }
  /// Missing pieces leave the stores at their defaults.
  void load(fabric::Stores& stores) const;
  void save(const fabric::Stores& stores) const;

 private:
  std::filesystem::path dir_;
};

struct DeployOptions {
  std::filesystem::path checkpoint;
  std::optional<int> zone;  // defaults to the zone the agent was trained on
  std::optional<twin::SensorMode> sensor_mode;
  std::optional<Mode> activate;  // also select it for this mode
};

struct DeployResult {
  std::string version;
  control::WrappedModel model;
};

/// Wraps a checkpoint and stores the bundle. Nothing is stored when loading or
/// wrapping fails.
DeployResult deploy(fabric::Stores& stores, const DeployOptions& options);

}  // namespace forgeline::harness
