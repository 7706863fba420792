#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace newsfdi {

using Date = std::chrono::year_month_day;

// Accepts "YYYY-MM-DD", optionally followed by a 'T' time part.
std::optional<Date> parse_date(std::string_view text);

std::string format_date(const Date& d);

}  // namespace newsfdi
