#pragma once

#include <string>

#include "erie/value.hpp"

namespace erie {

// Formats a number with a subset of the d3-format mini-language:
//   ""      default: trimmed decimal ("4.5", "3", "0.001")
//   ".4"    up to 4 significant digits, general notation ("1.654e-30")
//   ".2f"   fixed decimals
//   "%"/".1%" percent
//   "s"/".3s" SI-prefixed
//   "d"     integer
std::string format_number(double v, const std::string& pattern);

// strftime-style date formatting for epoch-millisecond values (UTC).
std::string format_datetime(double epochMs, const std::string& pattern);

// Formats a cell for speech/labels: numbers honor the pattern, datetimes use
// strftime tokens when the pattern contains '%', text passes through.
std::string format_value(const Value& v, const std::string& pattern, bool isDatetime = false);

}  // namespace erie
