#pragma once

#include <string>
#include <string_view>

namespace robreg {

/// 17 significant digits ("%.17g"), enough for an exact double round trip.
std::string format_double(double value);

/// Strict parse of a whole string as a double; throws DataError on
/// trailing garbage, empty input or non-finite results.
double parse_double(std::string_view text);

}  // namespace robreg
