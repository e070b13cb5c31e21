#include "forgeline/twin/rod.hpp"

#include <cmath>

#include "forgeline/common/error.hpp"

namespace forgeline::twin {

Rod make_rod(std::string id, double front_position, double length, double temp_c,
             double segment_length) {
  if (!(length > 0.0) || !(segment_length > 0.0)) {
    throw ConfigError("rod length and segment length must be positive");
  }
  // Tolerate lengths that are a whole number of segments up to rounding.
  const auto count = static_cast<std::size_t>(std::ceil(length / segment_length - 1e-9));
  Rod rod;
  rod.id = std::move(id);
  rod.front_position = front_position;
  rod.length = length;
  rod.segment_temps.assign(count == 0 ? 1 : count, temp_c);
  return rod;
}

double segment_center(const Rod& rod, std::size_t i, double segment_length) {
  return rod.front_position - (static_cast<double>(i) + 0.5) * segment_length;
}

Rod zebra_init(const Rod& rod, double hot_c, double cold_c, double band_m, double segment_length,
               double ambient_c) {
  if (!(hot_c >= cold_c) || !(cold_c >= ambient_c)) {
    throw ConfigError("zebra pattern needs hot >= cold >= ambient");
  }
  if (!(band_m >= segment_length)) {
    throw ConfigError("zebra band must be at least one segment wide");
  }
  Rod out = rod;
  for (std::size_t i = 0; i < out.segment_temps.size(); ++i) {
    const double from_front = (static_cast<double>(i) + 0.5) * segment_length;
    const auto band = static_cast<long long>(std::floor(from_front / band_m));
    out.segment_temps[i] = band % 2 == 0 ? hot_c : cold_c;
  }
  return out;
}

}  // namespace forgeline::twin
