#pragma once

#include <ostream>

#include "forgeline/twin/twin.hpp"

namespace forgeline::twin {

/// Columns: step, rod_front_m, T_sensor_1..k, P_z1..P_z5.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace forgeline::twin
