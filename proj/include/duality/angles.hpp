#pragma once

#include <string>
#include <string_view>

namespace duality {

/// Parses an angle in radians. Accepts decimals ("0.5", "-1e-3"), fractions
/// ("1/3") and multiples of pi ("pi", "-pi/4", "3pi/2", "2*pi/3", "0.25pi").
/// Throws std::invalid_argument on anything else.
double parse_angle(std::string_view text);

/// Parses "RxC" grid sizes such as "9x9"; both parts must be positive.
std::pair<int, int> parse_grid(std::string_view text);

}  // namespace duality
