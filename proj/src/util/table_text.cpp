#include "newsfdi/table_text.hpp"

#include <algorithm>

namespace newsfdi {

std::size_t display_width(const std::string& s) {
    std::size_t n = 0;
    for (unsigned char c : s) {
        if ((c & 0xC0) != 0x80) ++n;
    }
    return n;
}

void TextTable::render(std::ostream& out) const {
    std::vector<std::size_t> width(header_.size(), 0);
    auto measure = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size() && i < width.size(); ++i) {
            width[i] = std::max(width[i], display_width(row[i]));
        }
    };
    measure(header_);
    for (const auto& r : rows_) measure(r);

    std::size_t total = 0;
    for (auto w : width) total += w;
    total += width.empty() ? 0 : 2 * (width.size() - 1);
    const std::string rule(total, '-');

    auto emit = [&](const std::vector<std::string>& row) {
        std::string line;
        for (std::size_t i = 0; i < width.size(); ++i) {
            const std::string cell = i < row.size() ? row[i] : "";
            const std::string pad(width[i] - display_width(cell), ' ');
            if (i) line += "  ";
            line += i == 0 ? cell + pad : pad + cell;
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out << line << '\n';
    };
    out << rule << '\n';
    emit(header_);
    out << rule << '\n';
    for (const auto& r : rows_) {
        if (r.empty()) {
            out << rule << '\n';
        } else {
            emit(r);
        }
    }
    out << rule << '\n';
}

}  // namespace newsfdi
