#include "newsfdi/format.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace newsfdi {

std::string format_real(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

std::string format_fixed(double x, int decimals) {
    if (!std::isfinite(x)) return format_real(x);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
    std::string s(buf);
    if (s.starts_with('-') && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

std::string format_significant(double x, int digits) {
    if (!std::isfinite(x)) return format_real(x);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%#.*g", digits, x);
    std::string s(buf);
    if (s.ends_with('.')) s.pop_back();
    if (s.starts_with('-') && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

std::string format_count(std::size_t n) {
    std::string digits = std::to_string(n);
    std::string out;
    const std::size_t lead = digits.size() % 3;
    for (std::size_t i = 0; i < digits.size(); ++i) {
        if (i != 0 && (i + 3 - lead) % 3 == 0) out += ',';
        out += digits[i];
    }
    return out;
}

}  // namespace newsfdi
