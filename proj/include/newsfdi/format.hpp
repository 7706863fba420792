#pragma once

#include <cstddef>
#include <string>

namespace newsfdi {

// Shortest text that parses back to the same double.
std::string format_real(double x);

// Fixed-point with `decimals` digits; "-0.000" is printed as "0.000".
std::string format_fixed(double x, int decimals);

// `digits` significant digits, trailing zeros kept ("1.490", "-16.47").
std::string format_significant(double x, int digits);

// Integer with thousands separators ("6,363").
std::string format_count(std::size_t n);

}  // namespace newsfdi
