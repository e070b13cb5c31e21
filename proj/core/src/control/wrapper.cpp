#include "forgeline/control/wrapper.hpp"

#include <algorithm>
#include <cmath>

#include "forgeline/common/error.hpp"
#include "forgeline/drl/env.hpp"

namespace forgeline::control {

double InterpolationSpec::interpolate(std::span<const double> y, double x) const {
  const std::vector<double>& k = knot_positions;
  if (y.size() != k.size() || k.empty()) throw DimensionError("interpolation needs one value per knot");
  if (x <= k.front()) return y.front();
  if (x >= k.back()) return y.back();
  const auto upper = std::upper_bound(k.begin(), k.end(), x);
  const auto i = static_cast<std::size_t>(upper - k.begin()) - 1;
  const double t = (x - k[i]) / (k[i + 1] - k[i]);
  return y[i] + t * (y[i + 1] - y[i]);
}

std::vector<double> InterpolationSpec::evaluate(std::span<const double> y) const {
  std::vector<double> out;
  out.reserve(query_positions.size());
  for (double x : query_positions) out.push_back(interpolate(y, x));
  return out;
}

twin::ZoneActions decide_actions(const Scores& scores, const std::array<bool, kZoneCount>& controlled,
                                 bool supports_drop) {
  twin::ZoneActions actions;
  actions.fill(twin::PowerAction::NoChange);
  for (std::size_t z = 0; z < kZoneCount; ++z) {
    if (!controlled[z]) continue;
    const double* s = scores.data() + z * kSlotsPerZone;
    // Same order as the agents' lowest-index tie rule.
    std::size_t best = kDecrease;
    for (std::size_t slot : {kNoChange, kIncrease}) {
      if (s[slot] > s[best]) best = slot;
    }
    if (supports_drop && s[kDrop] > s[best]) best = kDrop;
    switch (best) {
      case kIncrease: actions[z] = twin::PowerAction::Increase; break;
      case kDecrease: actions[z] = twin::PowerAction::Decrease; break;
      case kDrop: actions[z] = twin::PowerAction::DropToLow; break;
      default: actions[z] = twin::PowerAction::NoChange; break;
    }
  }
  return actions;
}

twin::ZoneActions decide(const DecisionModel& model, const Features& x) {
  return decide_actions(model.forward(x), model.controlled_zones(), model.supports_drop());
}

std::vector<std::size_t> zone_temperature_features(int zone) {
  if (zone < 1 || zone > static_cast<int>(kZoneCount)) throw WrappingError("zone must lie in 1..5");
  const std::size_t first = forge_sensor_offset(static_cast<std::size_t>(zone));
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < kForgeSensorsPerZone[static_cast<std::size_t>(zone - 1)]; ++i) out.push_back(first + i);
  return out;
}

std::size_t zone_power_feature(int zone) {
  if (zone < 1 || zone > static_cast<int>(kZoneCount)) throw WrappingError("zone must lie in 1..5");
  return kForgeSensorCount + static_cast<std::size_t>(zone - 1);
}

Eigen::VectorXd WrappedModel::native_input(const Features& x) const {
  std::vector<double> knots;
  knots.reserve(temp_features.size());
  for (std::size_t idx : temp_features) knots.push_back(x[idx]);
  const std::vector<double> temps = sensor_mode == twin::SensorMode::Virtual ? interpolation.evaluate(knots) : knots;
  return drl::native_observation(temps, x[power_feature], normalize, norm);
}

Scores WrappedModel::forward(const Features& x) const {
  const Eigen::VectorXd y = network.forward(native_input(x));
  Scores out{};
  const std::size_t base = static_cast<std::size_t>(zone - 1) * kSlotsPerZone;
  // Agent order is decrease, keep, increase.
  out[base + kIncrease] = y(2);
  out[base + kDecrease] = y(0);
  out[base + kNoChange] = y(1);
  return out;
}

std::array<bool, kZoneCount> WrappedModel::controlled_zones() const {
  std::array<bool, kZoneCount> mask{};
  mask[static_cast<std::size_t>(zone - 1)] = true;
  return mask;
}

WrappedModel wrap_model(const drl::Mlp& agent, int zone, twin::SensorMode sensor_mode, const drl::NormBounds& norm,
                        bool normalize, std::vector<double> knot_positions, std::vector<double> query_positions) {
  WrappedModel m;
  m.zone = zone;
  m.temp_features = zone_temperature_features(zone);
  m.power_feature = zone_power_feature(zone);
  m.sensor_mode = sensor_mode;
  m.normalize = normalize;
  drl::validate(norm);
  m.norm = norm;

  if (agent.shape().output != 3) throw WrappingError("agent must emit three action scores");
  if (!agent.all_finite()) throw WrappingError("agent parameters are not finite");
  const std::size_t temps = sensor_mode == twin::SensorMode::Virtual ? query_positions.size() : m.temp_features.size();
  if (sensor_mode == twin::SensorMode::Virtual) {
    if (knot_positions.size() != m.temp_features.size()) {
      throw WrappingError("interpolation needs one knot per zone sensor");
    }
    if (query_positions.empty()) throw WrappingError("virtual sensor mode needs query positions");
    for (std::size_t i = 1; i < knot_positions.size(); ++i) {
      if (!(knot_positions[i] > knot_positions[i - 1])) throw WrappingError("knot positions must increase");
    }
    m.interpolation = {std::move(knot_positions), std::move(query_positions)};
  }
  if (agent.shape().input != temps + 1) {
    throw WrappingError("agent expects " + std::to_string(agent.shape().input) + " inputs but " +
                        std::string(twin::to_string(sensor_mode)) + " sensors of zone " + std::to_string(zone) +
                        " provide " + std::to_string(temps + 1));
  }
  m.network = agent;
  return m;
}

WrappedModel wrap_checkpoint(const drl::Checkpoint& checkpoint) {
  const drl::FurnaceEnvConfig& env = checkpoint.env;
  const twin::TwinConfig tc = drl::FurnaceEnv::make_twin_config(env);
  const double origin = tc.furnace_start();
  std::vector<double> knots;
  for (std::size_t idx : zone_temperature_features(env.zone)) knots.push_back(tc.sensor_positions_forge[idx] - origin);
  std::vector<double> queries;
  if (env.sensor_mode == twin::SensorMode::Virtual) {
    for (double p : tc.sensor_positions_virtual[static_cast<std::size_t>(env.zone - 1)]) queries.push_back(p - origin);
  }
  WrappedModel m = wrap_model(checkpoint.policy(), env.zone, env.sensor_mode, env.norm, env.normalize,
                              std::move(knots), std::move(queries));
  m.source_algorithm = std::string(drl::to_string(checkpoint.algorithm));
  return m;
}

nlohmann::json to_json(const WrappedModel& m) {
  nlohmann::json controlled = nlohmann::json::array();
  for (bool c : m.controlled_zones()) controlled.push_back(c);
  return {{"format", "forgeline-wrapped-model"},
          {"schema", kWrapperSchema},
          {"zone", m.zone},
          {"sensor_mode", std::string(twin::to_string(m.sensor_mode))},
          {"normalize", m.normalize},
          {"norm_bounds", m.norm},
          {"input_features", kInputFeatures},
          {"output_features", kOutputFeatures},
          {"temp_features", m.temp_features},
          {"power_feature", m.power_feature},
          {"controlled_zones", controlled},
          {"supports_drop", false},
          {"interpolation",
           {{"method", "piecewise_linear_clamped"},
            {"knot_positions", m.interpolation.knot_positions},
            {"query_positions", m.interpolation.query_positions}}},
          {"source_algorithm", m.source_algorithm},
          {"network", drl::mlp_to_json(m.network)}};
}

WrappedModel wrapped_model_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object() || j.value("format", "") != "forgeline-wrapped-model") {
      throw WrappingError("not a wrapped model bundle");
    }
    if (j.at("schema").get<int>() != kWrapperSchema) throw WrappingError("unsupported wrapped model schema");
    const drl::Mlp net = drl::mlp_from_json(j.at("network"));
    const auto& interp = j.at("interpolation");
    WrappedModel m = wrap_model(net, j.at("zone").get<int>(),
                                twin::sensor_mode_from_string(j.at("sensor_mode").get<std::string>()),
                                j.at("norm_bounds").get<drl::NormBounds>(), j.at("normalize").get<bool>(),
                                interp.at("knot_positions").get<std::vector<double>>(),
                                interp.at("query_positions").get<std::vector<double>>());
    m.source_algorithm = j.value("source_algorithm", "");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw WrappingError(std::string("malformed wrapped model: ") + e.what());
  } catch (const ConfigError& e) {
    throw WrappingError(std::string("malformed wrapped model: ") + e.what());
  }
}

std::string to_bundle(const WrappedModel& model) { return to_json(model).dump(); }

WrappedModel from_bundle(const std::string& bytes) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::exception& e) {
    throw WrappingError(std::string("wrapped model bundle is not JSON: ") + e.what());
  }
  return wrapped_model_from_json(j);
}

}  // namespace forgeline::control
