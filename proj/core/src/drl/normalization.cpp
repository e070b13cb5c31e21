#include "forgeline/drl/normalization.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "forgeline/common/error.hpp"

namespace forgeline::drl {

void validate(const NormBounds& b) {
  const bool finite = std::isfinite(b.temp_min_c) && std::isfinite(b.temp_max_c) &&
                      std::isfinite(b.power_min_kw) && std::isfinite(b.power_max_kw);
  if (!finite || !(b.temp_max_c > b.temp_min_c) || !(b.power_max_kw > b.power_min_kw)) {
    throw ConfigError("normalization bounds need finite min < max for temperature and power");
  }
}

void to_json(nlohmann::json& j, const NormBounds& b) {
  j = {{"temp_min_c", b.temp_min_c},
       {"temp_max_c", b.temp_max_c},
       {"power_min_kw", b.power_min_kw},
       {"power_max_kw", b.power_max_kw}};
}

void from_json(const nlohmann::json& j, NormBounds& b) {
  b.temp_min_c = j.value("temp_min_c", b.temp_min_c);
  b.temp_max_c = j.value("temp_max_c", b.temp_max_c);
  b.power_min_kw = j.value("power_min_kw", b.power_min_kw);
  b.power_max_kw = j.value("power_max_kw", b.power_max_kw);
}

}  // namespace forgeline::drl
