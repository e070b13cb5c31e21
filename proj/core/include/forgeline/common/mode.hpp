#pragma once

#include <string>
#include <string_view>

namespace forgeline {

/// Furnace production mode.
enum class Mode { NormalProduction, Warmholding };

std::string_view to_string(Mode mode);
Mode mode_from_string(std::string_view text);

}  // namespace forgeline
