#include "forgeline/twin/trajectory_io.hpp"

#include <iomanip>

namespace forgeline::twin {

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  const std::size_t sensors =
      trajectory.steps.empty() ? 0 : trajectory.steps.front().readout.temps.size();
  out << "step,rod_front_m";
  for (std::size_t i = 1; i <= sensors; ++i) out << ",T_sensor_" << i;
  for (std::size_t z = 1; z <= kZoneCount; ++z) out << ",P_z" << z;
  out << '\n';
  out << std::setprecision(10);
  for (const StepResult& s : trajectory.steps) {
    out << s.state.clock << ',';
    if (!s.state.rods.empty()) out << s.state.rods.front().front_position;
    for (double t : s.readout.temps) out << ',' << t;
    for (double p : s.readout.powers) out << ',' << p;
    out << '\n';
  }
}

}  // namespace forgeline::twin
