#pragma once

#include <cstdint>
#include <string>

namespace forgeline::testing {

struct PropertyOutcome {
  int cases = 0;
  int failures = 0;
  std::string first_failure;

  bool ok() const { return cases > 0 && failures == 0; }
  void fail(int case_index, const std::string& what);
};

PropertyOutcome twin_determinism(int cases, std::uint64_t seed);
PropertyOutcome twin_cooling_fixed_point(int cases, std::uint64_t seed);
PropertyOutcome twin_power_clamping(int cases, std::uint64_t seed);
PropertyOutcome twin_movement_bounds(int cases, std::uint64_t seed);
PropertyOutcome twin_heating_monotone_in_power(int cases, std::uint64_t seed);
PropertyOutcome twin_zebra_amplitude(int cases, std::uint64_t seed);
PropertyOutcome twin_sensor_at_segment_center(int cases, std::uint64_t seed);
PropertyOutcome twin_run_composition(int cases, std::uint64_t seed);

}  // namespace forgeline::testing
