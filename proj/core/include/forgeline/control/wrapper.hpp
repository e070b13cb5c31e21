#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "forgeline/common/zones.hpp"
#include "forgeline/drl/checkpoint.hpp"
#include "forgeline/drl/mlp.hpp"
#include "forgeline/drl/normalization.hpp"
#include "forgeline/twin/config.hpp"
#include "forgeline/twin/twin.hpp"

namespace forgeline::control {

inline constexpr std::size_t kInputFeatures = kForgeSensorCount + kZoneCount;  // 23
inline constexpr std::size_t kSlotsPerZone = 4;
inline constexpr std::size_t kOutputFeatures = kZoneCount * kSlotsPerZone;  // 20
inline constexpr int kWrapperSchema = 1;

using Features = std::array<double, kInputFeatures>;
using Scores = std::array<double, kOutputFeatures>;

/// Output slot order within a zone.
enum Slot : std::size_t { kIncrease = 0, kDecrease = 1, kNoChange = 2, kDrop = 3 };

/// Piecewise-linear interpolation through (knot position, knot temperature)
/// pairs, held constant beyond the first and last knot.
struct InterpolationSpec {
  std::vector<double> knot_positions;   // strictly increasing
  std::vector<double> query_positions;

  double interpolate(std::span<const double> knot_values, double x) const;
  std::vector<double> evaluate(std::span<const double> knot_values) const;

  bool operator==(const InterpolationSpec&) const = default;
};

/// Anything that maps the 23-feature plant vector to 20 action scores.
class DecisionModel {
 public:
  virtual ~DecisionModel() = default;
  virtual Scores forward(const Features& x) const = 0;
  virtual std::array<bool, kZoneCount> controlled_zones() const = 0;
  virtual bool supports_drop() const { return false; }
};

/// Per zone: NoChange for uncontrolled zones, otherwise the best-scoring
/// supported slot, ties resolved decrease, no change, increase, drop.
twin::ZoneActions decide_actions(const Scores& scores, const std::array<bool, kZoneCount>& controlled,
                                 bool supports_drop);
twin::ZoneActions decide(const DecisionModel& model, const Features& x);

/// Deployment shim giving a single-zone agent the plant-wide interface.
class WrappedModel final : public DecisionModel {
 public:
  int zone = 3;  // 1-based
  twin::SensorMode sensor_mode = twin::SensorMode::Virtual;
  bool normalize = true;
  drl::NormBounds norm;
  std::vector<std::size_t> temp_features;  // 0-based indices into the 23-vector
  std::size_t power_feature = 0;
  InterpolationSpec interpolation;  // virtual mode only
  drl::Mlp network;
  std::string source_algorithm;

  /// Agent input assembled from the plant vector.
  Eigen::VectorXd native_input(const Features& x) const;

  Scores forward(const Features& x) const override;
  std::array<bool, kZoneCount> controlled_zones() const override;
};

/// Forge sensor feature indices for a 1-based zone.
std::vector<std::size_t> zone_temperature_features(int zone);
std::size_t zone_power_feature(int zone);

/// Builds the wrapper. Knot and query positions are measured from the furnace
/// entry. Throws WrappingError when the agent input size disagrees with the
/// sensor mode.
WrappedModel wrap_model(const drl::Mlp& agent, int zone, twin::SensorMode sensor_mode, const drl::NormBounds& norm,
                        bool normalize, std::vector<double> knot_positions, std::vector<double> query_positions);

/// Wraps a training checkpoint using the sensor layout of its environment.
WrappedModel wrap_checkpoint(const drl::Checkpoint& checkpoint);

nlohmann::json to_json(const WrappedModel& model);
WrappedModel wrapped_model_from_json(const nlohmann::json& j);

/// Canonical bytes stored in the algorithm store.
std::string to_bundle(const WrappedModel& model);
WrappedModel from_bundle(const std::string& bytes);

}  // namespace forgeline::control
