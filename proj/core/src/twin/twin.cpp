#include "forgeline/twin/twin.hpp"

#include <algorithm>
#include <cmath>

#include "forgeline/common/error.hpp"

namespace forgeline::twin {

FurnaceTwin::FurnaceTwin(TwinConfig config) : config_(std::move(config)) {
  validate(config_);
  coils_ = config_.coil_layout;
  std::sort(coils_.begin(), coils_.end(),
            [](const Coil& a, const Coil& b) { return a.start_m < b.start_m; });
}

double FurnaceTwin::voltage_for_power(double power_kw) const {
  return std::sqrt(1000.0 * power_kw * config_.zone_resistance_ohm);
}

double FurnaceTwin::power_for_voltage(double voltage) const {
  return voltage * voltage / (1000.0 * config_.zone_resistance_ohm);
}

FurnaceState FurnaceTwin::init(std::vector<Rod> rods) const {
  const double track_end = config_.track_end();
  for (Rod& rod : rods) {
    if (!(rod.length > 0.0)) throw ConfigError("rod '" + rod.id + "' has non-positive length");
    const auto expected =
        static_cast<std::size_t>(std::ceil(rod.length / config_.segment_length - 1e-9));
    if (rod.segment_temps.empty()) rod.segment_temps.assign(std::max<std::size_t>(expected, 1), config_.ambient_temp);
    if (rod.segment_temps.size() != std::max<std::size_t>(expected, 1)) {
      throw ConfigError("rod '" + rod.id + "' segment count does not match its length");
    }
    if (rod.rear_position() < -1e-9 || rod.front_position > track_end + 1e-9) {
      throw ConfigError("rod '" + rod.id + "' lies outside the track [0, " + std::to_string(track_end) + "]");
    }
  }
  for (std::size_t i = 0; i < rods.size(); ++i) {
    for (std::size_t j = i + 1; j < rods.size(); ++j) {
      const Rod& a = rods[i];
      const Rod& b = rods[j];
      if (a.rear_position() < b.front_position && b.rear_position() < a.front_position) {
        throw ConfigError("rods '" + a.id + "' and '" + b.id + "' overlap");
      }
    }
  }
  if (config_.mode == Mode::Warmholding && !rods.empty()) {
    const double front = rods.front().front_position;
    if (front < config_.warmhold_span.first || front > config_.warmhold_span.second) {
      throw ConfigError("lead rod front lies outside warmhold_span");
    }
  }

  FurnaceState state;
  state.rods = std::move(rods);
  state.mode = config_.mode;
  state.zone_powers = config_.initial_powers;
  for (std::size_t z = 0; z < kZoneCount; ++z) {
    state.zone_voltages[z] = voltage_for_power(state.zone_powers[z]);
  }
  return state;
}

int FurnaceTwin::zone_at(double x) const {
  auto it = std::upper_bound(coils_.begin(), coils_.end(), x,
                             [](double pos, const Coil& c) { return pos < c.start_m; });
  if (it == coils_.begin()) return 0;
  --it;
  return x < it->end_m ? it->zone : 0;
}

// Controller manager.
void FurnaceTwin::apply_controller(FurnaceState& state, const ZoneActions& actions) const {
  const auto [lo, hi] = config_.power_bounds;
  for (std::size_t z = 0; z < kZoneCount; ++z) {
    double wanted = state.zone_powers[z];
    switch (actions[z]) {
      case PowerAction::Increase: wanted += config_.power_action_step; break;
      case PowerAction::Decrease: wanted -= config_.power_action_step; break;
      case PowerAction::DropToLow: wanted = lo; break;
      case PowerAction::NoChange: break;
    }
    const double clamped = std::clamp(wanted, lo, hi);
    if (clamped != wanted) ++state.clamped_actions;
    if (clamped != state.zone_powers[z]) {
      state.zone_powers[z] = clamped;
      state.zone_voltages[z] = voltage_for_power(clamped);
    }
  }
}

void FurnaceTwin::set_zone_powers(FurnaceState& state, const ZoneVector& powers) const {
  const auto [lo, hi] = config_.power_bounds;
  for (std::size_t z = 0; z < kZoneCount; ++z) {
    const double clamped = std::clamp(powers[z], lo, hi);
    if (clamped != powers[z]) ++state.clamped_actions;
    state.zone_powers[z] = clamped;
    state.zone_voltages[z] = voltage_for_power(clamped);
  }
}

// Movement manager; in warmholding the warmholding manager reflects the lead rod
// between the span bounds and every rod follows the same displacement.
void FurnaceTwin::apply_movement(FurnaceState& state) const {
  if (state.rods.empty()) return;
  if (state.mode == Mode::NormalProduction) {
    const double dx = config_.rod_velocity * config_.step_seconds;
    for (Rod& rod : state.rods) {
      rod.front_position += dx;
      rod.direction = Direction::Forward;
    }
    return;
  }

  const auto [left, right] = config_.warmhold_span;
  Rod& lead = state.rods.front();
  double pos = lead.front_position;
  double sign = lead.direction == Direction::Forward ? 1.0 : -1.0;
  double remaining = config_.warmhold_speed * config_.step_seconds;
  // Walk the distance, bouncing off the bounds.
  for (int guard = 0; remaining > 0.0 && guard < 1000; ++guard) {
    const double bound = sign > 0 ? right : left;
    const double room = std::abs(bound - pos);
    if (remaining <= room) {
      pos += sign * remaining;
      remaining = 0.0;
    } else {
      pos = bound;
      remaining -= room;
      sign = -sign;
    }
  }
  pos = std::clamp(pos, left, right);
  const double dx = pos - lead.front_position;
  const Direction dir = sign > 0 ? Direction::Forward : Direction::Backward;
  for (Rod& rod : state.rods) {
    rod.front_position += dx;
    rod.direction = dir;
  }
}

// Temperature manager: linear induction heating under a live coil, Newton
// cooling elsewhere. Written so each update is monotone in T and in P.
void FurnaceTwin::apply_temperature(FurnaceState& state) const {
  const double dt = config_.step_seconds;
  const double ambient = config_.ambient_temp;
  const double keep = 1.0 - config_.cooling_rate * dt;
  const double seg = config_.segment_length;
  ZoneVector heat{};
  for (std::size_t z = 0; z < kZoneCount; ++z) heat[z] = config_.heating_gain * state.zone_powers[z] * dt;

  const double first_coil = coils_.front().start_m;
  for (Rod& rod : state.rods) {
    for (std::size_t i = 0; i < rod.segment_temps.size(); ++i) {
      double& t = rod.segment_temps[i];
      const double x = segment_center(rod, i, seg);
      if (x < first_coil) {
        // Segments are ordered front to rear, so the rest of the rod is outside too.
        for (std::size_t r = i; r < rod.segment_temps.size(); ++r) {
          double& tr = rod.segment_temps[r];
          tr = ambient + (tr - ambient) * keep;
        }
        break;
      }
      const int zone = zone_at(x);
      if (zone > 0 && state.zone_powers[static_cast<std::size_t>(zone - 1)] > 0.0) {
        t = t + heat[static_cast<std::size_t>(zone - 1)];
      } else {
        t = ambient + (t - ambient) * keep;
      }
    }
  }
}

void FurnaceTwin::advance(FurnaceState& state, const std::optional<ZoneActions>& actions) const {
  if (actions) apply_controller(state, *actions);
  apply_movement(state);
  apply_temperature(state);
  ++state.clock;
}

StepResult FurnaceTwin::step(const FurnaceState& state,
                             const std::optional<ZoneActions>& actions) const {
  StepResult result{state, {}};
  advance(result.state, actions);
  result.readout = read_sensors(result.state);
  return result;
}

Trajectory FurnaceTwin::run(const FurnaceState& state, const Controller& controller, int steps) const {
  if (steps < 1) throw ConfigError("twin run needs at least one step");
  Trajectory trajectory;
  trajectory.steps.reserve(static_cast<std::size_t>(steps));
  FurnaceState current = state;
  for (int k = 0; k < steps; ++k) {
    std::optional<ZoneActions> actions;
    try {
      if (controller) actions = controller(current);
    } catch (const std::exception& e) {
      trajectory.error = std::string("controller failed at step ") + std::to_string(k) + ": " + e.what();
      return trajectory;
    }
    trajectory.steps.push_back(step(current, actions));
    current = trajectory.steps.back().state;
  }
  return trajectory;
}

double FurnaceTwin::temperature_at(const FurnaceState& state, double x) const {
  const double seg = config_.segment_length;
  for (const Rod& rod : state.rods) {
    // The last segment may reach past the nominal rear when the length is not a whole number of segments.
    const double covered_rear = std::min(rod.rear_position(), rod.front_position - seg * static_cast<double>(rod.segment_count()));
    if (x > rod.front_position || x < covered_rear) continue;
    const double idx = std::floor((rod.front_position - x) / seg);
    if (idx < 0.0) continue;
    const auto i = static_cast<std::size_t>(idx);
    if (i < rod.segment_temps.size()) return rod.segment_temps[i];
  }
  return config_.ambient_temp;
}

std::vector<double> FurnaceTwin::readout_positions() const {
  if (config_.sensor_mode == SensorMode::Forge) return config_.sensor_positions_forge;
  std::vector<double> positions;
  for (const auto& zone : config_.sensor_positions_virtual) {
    positions.insert(positions.end(), zone.begin(), zone.end());
  }
  return positions;
}

// Sensor manager.
SensorReadout FurnaceTwin::read_sensors(const FurnaceState& state,
                                        std::span<const double> positions) const {
  SensorReadout readout;
  readout.positions.assign(positions.begin(), positions.end());
  readout.temps.reserve(positions.size());
  for (double x : positions) readout.temps.push_back(temperature_at(state, x));
  readout.powers = state.zone_powers;
  return readout;
}

SensorReadout FurnaceTwin::read_sensors(const FurnaceState& state) const {
  const std::vector<double> positions = readout_positions();
  return read_sensors(state, positions);
}

}  // namespace forgeline::twin
