#pragma once

// Minimal RFC 4180 reader/writer: quoted fields, doubled quotes, CRLF.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace newsfdi::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  // 1-based source line of each row

    // Column index by header name, or npos.
    std::size_t column(std::string_view name) const;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

// Parses the whole text. Throws DataError on an unterminated quote.
Table parse(std::string_view text);

// Reads and parses a file. Throws DataError if unreadable.
Table read_file(const std::filesystem::path& path);

std::string escape(std::string_view field);

std::string format_row(const std::vector<std::string>& fields);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace newsfdi::csv
