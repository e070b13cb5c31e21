#include "forgeline/common/mode.hpp"

#include "forgeline/common/error.hpp"

namespace forgeline {

std::string_view to_string(Mode mode) {
  return mode == Mode::NormalProduction ? "NormalProduction" : "Warmholding";
}

Mode mode_from_string(std::string_view text) {
  if (text == "NormalProduction" || text == "normal" || text == "np") return Mode::NormalProduction;
  if (text == "Warmholding" || text == "warmholding" || text == "wh") return Mode::Warmholding;
  throw ConfigError("unknown production mode '" + std::string(text) + "'");
}

}  // namespace forgeline
