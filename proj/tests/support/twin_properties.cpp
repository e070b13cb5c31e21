#include "twin_properties.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "forgeline/twin/twin.hpp"

namespace forgeline::testing {

using namespace forgeline::twin;

void PropertyOutcome::fail(int case_index, const std::string& what) {
  if (failures++ == 0) first_failure = "case " + std::to_string(case_index) + ": " + what;
}

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

TwinConfig random_config(Rng& rng) {
  TwinConfig c = default_twin_config(uniform(rng, 0.0, 10.0));
  c.heating_gain = uniform(rng, 0.001, 0.1);
  c.cooling_rate = uniform(rng, 0.001, 0.05);
  c.rod_velocity = uniform(rng, 0.02, 0.4);
  c.segment_length = std::vector<double>{0.025, 0.05, 0.1}[static_cast<std::size_t>(uniform_int(rng, 0, 2))];
  c.ambient_temp = uniform(rng, 0.0, 40.0);
  c.power_action_step = uniform(rng, 1.0, 50.0);
  const double lo = uniform(rng, 0.0, 50.0);
  c.power_bounds = {lo, lo + uniform(rng, 50.0, 600.0)};
  for (double& p : c.initial_powers) p = uniform(rng, c.power_bounds.first, c.power_bounds.second);
  return c;
}

Rod random_rod(Rng& rng, const TwinConfig& c, double max_front) {
  const double length = uniform(rng, 1.0, 8.0);
  const double front = uniform(rng, length, std::max(length + 0.1, max_front));
  Rod rod = make_rod("r", front, length, c.ambient_temp, c.segment_length);
  for (double& t : rod.segment_temps) t = c.ambient_temp + uniform(rng, 0.0, 1300.0);
  return rod;
}

PowerAction random_action(Rng& rng) { return static_cast<PowerAction>(uniform_int(rng, 0, 3)); }

std::vector<ZoneActions> random_actions(Rng& rng, int steps) {
  std::vector<ZoneActions> out(static_cast<std::size_t>(steps));
  for (ZoneActions& a : out) {
    for (PowerAction& x : a) x = random_action(rng);
  }
  return out;
}

double amplitude(const Rod& rod) {
  auto [lo, hi] = std::minmax_element(rod.segment_temps.begin(), rod.segment_temps.end());
  return *hi - *lo;
}

}  // namespace

PropertyOutcome twin_determinism(int cases, std::uint64_t seed) {
  PropertyOutcome out;
  Rng rng(seed);
  for (int k = 0; k < cases; ++k, ++out.cases) {
    TwinConfig c = random_config(rng);
    Rod rod = random_rod(rng, c, c.furnace_end());
    const auto actions = random_actions(rng, uniform_int(rng, 5, 60));
    auto run_once = [&] {
      FurnaceTwin twin(c);
      FurnaceState s = twin.init({rod});
      std::vector<StepResult> steps;
      for (const ZoneActions& a : actions) {
        steps.push_back(twin.step(s, a));
        s = steps.back().state;
      }
      return steps;
    };
    const auto a = run_once();
    const auto b = run_once();
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!(a[i].state == b[i].state) || a[i].readout.temps != b[i].readout.temps) {
        out.fail(k, "trajectories differ at step " + std::to_string(i));
        break;
      }
    }
  }
  return out;
}

PropertyOutcome twin_cooling_fixed_point(int cases, std::uint64_t seed) {
  PropertyOutcome out;
  Rng rng(seed);
  for (int k = 0; k < cases; ++k, ++out.cases) {
    TwinConfig c = random_config(rng);
    c.power_bounds = {0.0, 600.0};
    c.initial_powers = {0.0, 0.0, 0.0, 0.0, 0.0};
    FurnaceTwin twin(c);
    FurnaceState s = twin.init({random_rod(rng, c, c.furnace_end())});
    const std::vector<double> initial = s.rods[0].segment_temps;
    const double amb = c.ambient_temp;
    const int steps = uniform_int(rng, 20, 200);
    bool bad = false;
    for (int n = 0; n < steps && !bad; ++n) {
      const std::vector<double> before = s.rods[0].segment_temps;
      twin.advance(s);
      for (std::size_t i = 0; i < before.size(); ++i) {
        const double d0 = before[i] - amb;
        const double d1 = s.rods[0].segment_temps[i] - amb;
        if (std::abs(d0) > 1e-9 && !(std::abs(d1) < std::abs(d0))) {
          out.fail(k, "|T - ambient| did not shrink at step " + std::to_string(n));
          bad = true;
          break;
        }
        if (d0 * d1 < 0.0) {
          out.fail(k, "temperature crossed ambient at step " + std::to_string(n));
          bad = true;
          break;
        }
      }
    }
    if (bad) continue;
    // Zero power everywhere: T_n - amb = (T_0 - amb) (1 - k dt)^n.
    const double keep = std::pow(1.0 - c.cooling_rate * c.step_seconds, steps);
    for (std::size_t i = 0; i < initial.size(); ++i) {
      const double expected = amb + (initial[i] - amb) * keep;
      if (std::abs(s.rods[0].segment_temps[i] - expected) > 1e-9 * std::max(1.0, std::abs(expected))) {
        out.fail(k, "segment " + std::to_string(i) + " departs from the closed-form cooling curve");
        break;
      }
    }
  }
  return out;
}

PropertyOutcome twin_power_clamping(int cases, std::uint64_t seed) {
  PropertyOutcome out;
  Rng rng(seed);
  for (int k = 0; k < cases; ++k, ++out.cases) {
    TwinConfig c = random_config(rng);
    c.power_action_step = uniform(rng, 10.0, 200.0);
    FurnaceTwin twin(c);
    FurnaceState s = twin.init({random_rod(rng, c, c.furnace_end())});
    for (const ZoneActions& a : random_actions(rng, uniform_int(rng, 10, 100))) {
      twin.advance(s, a);
      for (std::size_t z = 0; z < kZoneCount; ++z) {
        const double p = s.zone_powers[z];
        if (p < c.power_bounds.first || p > c.power_bounds.second) {
          out.fail(k, "zone power " + std::to_string(p) + " escaped the bounds");
          return out;
        }
        if (!(s.zone_voltages[z] > 0.0) && p > 0.0) {
          out.fail(k, "voltage not positive for positive power");
          return out;
        }
      }
    }
  }
  return out;
}

PropertyOutcome twin_movement_bounds(int cases, std::uint64_t seed) {
  PropertyOutcome out;
  Rng rng(seed);
  for (int k = 0; k < cases; ++k, ++out.cases) {
    TwinConfig c = random_config(rng);
    const bool warmholding = k % 2 == 1;
    Rod rod;
    if (warmholding) {
      c.mode = Mode::Warmholding;
      const double left = uniform(rng, c.furnace_start() + 1.0, c.furnace_end() - 3.0);
      c.warmhold_span = {left, left + uniform(rng, 0.1, 2.5)};
      c.warmhold_speed = uniform(rng, 0.01, 1.5);
      rod = make_rod("r", uniform(rng, c.warmhold_span.first, c.warmhold_span.second), 1.0, 900.0,
                     c.segment_length);
      if (uniform_int(rng, 0, 1) == 1) rod.direction = Direction::Backward;
    } else {
      rod = random_rod(rng, c, c.furnace_end());
    }
    FurnaceTwin twin(c);
    FurnaceState s = twin.init({rod});
    for (int n = 0; n < uniform_int(rng, 20, 200); ++n) {
      const double before = s.rods[0].front_position;
      twin.advance(s);
      const double after = s.rods[0].front_position;
      if (!warmholding && !(after > before)) {
        out.fail(k, "front did not advance in normal production");
        break;
      }
      if (!warmholding && std::abs((after - before) - c.rod_velocity * c.step_seconds) > 1e-9) {
        out.fail(k, "front advanced by the wrong distance");
        break;
      }
      if (warmholding && (after < c.warmhold_span.first || after > c.warmhold_span.second)) {
        out.fail(k, "front left warmhold_span");
        break;
      }
    }
  }
  return out;
}

PropertyOutcome twin_heating_monotone_in_power(int cases, std::uint64_t seed) {
  PropertyOutcome out;
  Rng rng(seed);
  for (int k = 0; k < cases; ++k, ++out.cases) {
    TwinConfig lo_cfg = random_config(rng);
    const std::size_t zone = static_cast<std::size_t>(uniform_int(rng, 0, 4));
    TwinConfig hi_cfg = lo_cfg;
    hi_cfg.initial_powers[zone] =
        uniform(rng, lo_cfg.initial_powers[zone], lo_cfg.power_bounds.second);
    const Rod rod = random_rod(rng, lo_cfg, lo_cfg.furnace_end());
    const auto actions = random_actions(rng, uniform_int(rng, 10, 120));
    FurnaceTwin lo_twin(lo_cfg);
    FurnaceTwin hi_twin(hi_cfg);
    FurnaceState lo = lo_twin.init({rod});
    FurnaceState hi = hi_twin.init({rod});
    for (std::size_t n = 0; n < actions.size(); ++n) {
      lo_twin.advance(lo, actions[n]);
      hi_twin.advance(hi, actions[n]);
      const auto& a = lo.rods[0].segment_temps;
      const auto& b = hi.rods[0].segment_temps;
      bool bad = false;
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (b[i] < a[i]) {
          out.fail(k, "raising zone " + std::to_string(zone + 1) + " power cooled segment " + std::to_string(i) +
                          " at step " + std::to_string(n));
          bad = true;
          break;
        }
      }
      if (bad) break;
    }
  }
  return out;
}

// The amplitude can only be compared with a single scalar update when every
// segment sees the same rule: zero power everywhere (pure cooling) or a rod
// oscillating inside one continuous heated span.
PropertyOutcome twin_zebra_amplitude(int cases, std::uint64_t seed) {
  PropertyOutcome out;
  Rng rng(seed);
  for (int k = 0; k < cases; ++k, ++out.cases) {
    const bool heated = k % 2 == 1;
    TwinConfig c = random_config(rng);
    c.mode = Mode::Warmholding;
    double uniform_power = 0.0;
    if (heated) {
      c.coil_layout = default_coil_layout(0.0, 1.0, 0.0);
      uniform_power = uniform(rng, c.power_bounds.first, c.power_bounds.second);
      c.initial_powers.fill(uniform_power);
    } else {
      c.power_bounds = {0.0, c.power_bounds.second};
      c.initial_powers.fill(0.0);
    }
    c.sensor_positions_forge = default_forge_sensor_positions(c.coil_layout);
    const double length = uniform(rng, 1.0, 4.0);
    const double left = c.furnace_start() + length + 0.5;
    c.warmhold_span = {left, left + uniform(rng, 0.5, 3.0)};
    c.warmhold_speed = uniform(rng, 0.02, 0.5);
    const double cold = c.ambient_temp + uniform(rng, 100.0, 900.0);
    const double hot = cold + uniform(rng, 0.0, 400.0);
    const double band = std::max(c.segment_length, uniform(rng, 0.1, 1.5));
    Rod rod = make_rod("r", uniform(rng, c.warmhold_span.first, c.warmhold_span.second), length, c.ambient_temp,
                       c.segment_length);
    rod = zebra_init(rod, hot, cold, band, c.segment_length, c.ambient_temp);

    FurnaceTwin twin(c);
    FurnaceState s = twin.init({rod});
    const double keep = 1.0 - c.cooling_rate * c.step_seconds;
    double reference = amplitude(s.rods[0]);
    double previous = reference;
    const int steps = uniform_int(rng, 20, 200);
    for (int n = 0; n < steps; ++n) {
      twin.advance(s);
      if (!heated) reference *= keep;
      const double now = amplitude(s.rods[0]);
      if (now > previous + 1e-9 * std::max(1.0, previous)) {
        out.fail(k, "amplitude grew at step " + std::to_string(n));
        break;
      }
      if (std::abs(now - reference) > 1e-7 * std::max(1.0, reference)) {
        out.fail(k, "amplitude " + std::to_string(now) + " departs from the scalar reference " +
                        std::to_string(reference));
        break;
      }
      previous = now;
    }
  }
  return out;
}

PropertyOutcome twin_sensor_at_segment_center(int cases, std::uint64_t seed) {
  PropertyOutcome out;
  Rng rng(seed);
  for (int k = 0; k < cases; ++k, ++out.cases) {
    TwinConfig c = random_config(rng);
    FurnaceTwin twin(c);
    FurnaceState s = twin.init({random_rod(rng, c, c.furnace_end())});
    for (int n = uniform_int(rng, 0, 30); n > 0; --n) twin.advance(s);
    const Rod& rod = s.rods[0];
    std::vector<std::size_t> picks;
    std::vector<double> positions;
    for (int i = 0; i < 18; ++i) {
      const auto seg = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(rod.segment_count()) - 1));
      picks.push_back(seg);
      positions.push_back(segment_center(rod, seg, c.segment_length));
    }
    const SensorReadout r = twin.read_sensors(s, positions);
    for (std::size_t i = 0; i < picks.size(); ++i) {
      if (r.temps[i] != rod.segment_temps[picks[i]]) {
        out.fail(k, "sensor at the center of segment " + std::to_string(picks[i]) + " read another value");
        break;
      }
    }
  }
  return out;
}

PropertyOutcome twin_run_composition(int cases, std::uint64_t seed) {
  PropertyOutcome out;
  Rng rng(seed);
  for (int k = 0; k < cases; ++k, ++out.cases) {
    TwinConfig c = random_config(rng);
    FurnaceTwin twin(c);
    const FurnaceState s0 = twin.init({random_rod(rng, c, c.furnace_end())});
    const int n = uniform_int(rng, 1, 40);
    const int m = uniform_int(rng, 1, 40);
    const std::uint64_t controller_seed = rng();
    auto controller = [&](const FurnaceState& s) -> std::optional<ZoneActions> {
      Rng local(controller_seed + static_cast<std::uint64_t>(s.clock));
      ZoneActions a{};
      for (PowerAction& x : a) x = random_action(local);
      return a;
    };
    const Trajectory whole = twin.run(s0, controller, n + m);
    const Trajectory first = twin.run(s0, controller, n);
    const Trajectory second = twin.run(first.steps.back().state, controller, m);
    if (whole.steps.size() != static_cast<std::size_t>(n + m) ||
        !(whole.steps.back().state == second.steps.back().state) ||
        !(whole.steps[static_cast<std::size_t>(n - 1)].state == first.steps.back().state)) {
      out.fail(k, "N then M steps differ from N+M steps");
    }
  }
  return out;
}

}  // namespace forgeline::testing
