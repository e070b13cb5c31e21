#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace forgeline::twin {

enum class Direction { Forward, Backward };

struct Rod {
  std::string id;
  double front_position = 0.0;  // m from warehouse origin
  double length = 0.0;
  std::vector<double> segment_temps;  // index 0 is the front segment
  Direction direction = Direction::Forward;

  double rear_position() const { return front_position - length; }
  std::size_t segment_count() const { return segment_temps.size(); }

  bool operator==(const Rod&) const = default;
};

/// Segment count is ceil(length / segment_length).
Rod make_rod(std::string id, double front_position, double length, double temp_c,
             double segment_length);

/// Center of segment `i`, counted from the front.
double segment_center(const Rod& rod, std::size_t i, double segment_length);

/// Alternating hot/cold bands of width `band_m`, starting hot at the front.
Rod zebra_init(const Rod& rod, double hot_c, double cold_c, double band_m,
               double segment_length, double ambient_c);

}  // namespace forgeline::twin
