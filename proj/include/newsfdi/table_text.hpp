#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace newsfdi {

// Plain-text table: first column left-aligned, the rest right-aligned.
class TextTable {
public:
    explicit TextTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<std::string> row) { rows_.push_back(std::move(row)); }
    void add_rule() { rows_.emplace_back(); }

    void render(std::ostream& out) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;  // empty row = horizontal rule
};

// Display width in code points.
std::size_t display_width(const std::string& s);

}  // namespace newsfdi
