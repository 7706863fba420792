#include "newsfdi/gazetteer.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "newsfdi/csv.hpp"
#include "newsfdi/error.hpp"

namespace newsfdi::gazetteer {
namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string_view location_name(Location loc) { return loc == Location::title ? "title" : "body"; }

std::vector<RegionRecord> load_gazetteer(const std::filesystem::path& path) {
    const csv::Table table = csv::read_file(path);
    const std::vector<std::string> expected{"region_id", "country", "canonical_name", "alias"};
    if (table.header != expected) {
        throw DataError(path.string() + ":1: gazetteer header must be region_id,country,canonical_name,alias");
    }
    std::map<std::string, RegionRecord> records;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string where = path.string() + ":" + std::to_string(table.line_numbers[r]) + ": ";
        if (row.size() != 4) throw DataError(where + "expected 4 fields, got " + std::to_string(row.size()));
        const std::string id = trim(row[0]);
        const std::string country = trim(row[1]);
        const std::string canonical = trim(row[2]);
        const std::string alias = trim(row[3]);
        if (id.empty()) throw DataError(where + "empty region_id");
        if (country.empty()) throw DataError(where + "empty country");
        if (canonical.empty()) throw DataError(where + "empty canonical_name");
        if (alias.empty()) throw DataError(where + "empty alias");

        auto [it, inserted] = records.try_emplace(id);
        RegionRecord& rec = it->second;
        if (inserted) {
            rec.region_id = id;
            rec.country = country;
            rec.canonical_name = canonical;
            rec.aliases.insert(canonical);
        } else if (rec.country != country || rec.canonical_name != canonical) {
            throw DataError(where + "duplicate region_id '" + id + "' with conflicting country/canonical_name");
        }
        rec.aliases.insert(alias);
    }
    std::vector<RegionRecord> out;
    out.reserve(records.size());
    for (auto& [id, rec] : records) out.push_back(std::move(rec));
    return out;
}

std::string GazetteerIndex::key_of(const std::vector<std::string>& tokens) {
    std::string key;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) key += ' ';
        key += tokens[i];
    }
    return key;
}

GazetteerIndex::GazetteerIndex(std::span<const RegionRecord> records) {
    for (const auto& rec : records) {
        if (!regions_.insert(rec.region_id).second) {
            throw DataError("gazetteer: duplicate region_id '" + rec.region_id + "'");
        }
        for (const auto& alias : rec.aliases) {
            const auto tokens = text::normalize_phrase(alias);
            if (tokens.empty()) {
                throw DataError("gazetteer: alias '" + alias + "' of region '" + rec.region_id +
                                "' normalizes to no tokens");
            }
            max_len_ = std::max(max_len_, tokens.size());
            auto& ids = by_alias_[key_of(tokens)];
            if (std::find(ids.begin(), ids.end(), rec.region_id) == ids.end()) ids.push_back(rec.region_id);
        }
    }
    for (auto& [key, ids] : by_alias_) std::sort(ids.begin(), ids.end());
}

std::vector<std::string> GazetteerIndex::lookup(std::string_view alias) const {
    const auto it = by_alias_.find(key_of(text::normalize_phrase(alias)));
    return it == by_alias_.end() ? std::vector<std::string>{} : it->second;
}

std::vector<std::string> GazetteerIndex::collisions() const {
    std::vector<std::string> out;
    for (const auto& [key, ids] : by_alias_) {
        if (ids.size() > 1) out.push_back(key);
    }
    return out;
}

std::string GazetteerIndex::dump() const {
    std::ostringstream out;
    for (const auto& [key, ids] : by_alias_) {
        out << key << '\t';
        for (std::size_t i = 0; i < ids.size(); ++i) out << (i ? "," : "") << ids[i];
        out << '\n';
    }
    return out.str();
}

std::vector<RegionMention> GazetteerIndex::tag(const std::string& article_id, std::string_view source,
                                               Location loc) const {
    std::vector<RegionMention> out;
    const auto words = text::segment(source, {});
    std::vector<std::string> window;
    std::size_t i = 0;
    while (i < words.size()) {
        std::size_t matched = 0;
        for (std::size_t len = std::min(max_len_, words.size() - i); len >= 1; --len) {
            window.clear();
            for (std::size_t k = i; k < i + len; ++k) window.push_back(words[k].token);
            const auto it = by_alias_.find(key_of(window));
            if (it == by_alias_.end()) continue;
            const text::Span span{words[i].span.begin, words[i + len - 1].span.end};
            const bool ambiguous = it->second.size() > 1;
            for (const auto& region : it->second) {
                out.push_back(RegionMention{article_id, region,
                                            std::string(source.substr(span.begin, span.end - span.begin)), loc, span,
                                            ambiguous});
            }
            matched = len;
            break;
        }
        i += matched ? matched : 1;
    }
    return out;
}

std::vector<RegionMention> tag_regions(const corpus::Article& a, const GazetteerIndex& idx) {
    auto mentions = idx.tag(a.id, a.title, Location::title);
    auto body = idx.tag(a.id, a.body, Location::body);
    mentions.insert(mentions.end(), std::make_move_iterator(body.begin()), std::make_move_iterator(body.end()));
    return mentions;
}

std::vector<corpus::Article> build_region_subcorpus(std::span<const corpus::Article> articles,
                                                    std::span<const RegionMention> mentions,
                                                    const std::string& region_id, const GazetteerIndex& idx,
                                                    AmbiguityPolicy policy) {
    if (!idx.has_region(region_id)) throw DataError("unknown region_id '" + region_id + "'");
    std::unordered_set<std::string> qualifying;
    for (const auto& m : mentions) {
        if (m.region_id != region_id) continue;
        if (m.ambiguous && policy == AmbiguityPolicy::drop) continue;
        qualifying.insert(m.article_id);
    }
    std::vector<corpus::Article> out;
    for (const auto& a : articles) {
        if (qualifying.contains(a.id)) out.push_back(a);
    }
    return out;
}

void write_mention_log(std::ostream& out, std::span<const RegionMention> mentions) {
    csv::write_row(out, {"article_id", "region_id", "alias", "location", "start", "end", "ambiguous"});
    for (const auto& m : mentions) {
        csv::write_row(out, {m.article_id, m.region_id, m.alias_matched, std::string(location_name(m.location)),
                             std::to_string(m.span.begin), std::to_string(m.span.end), m.ambiguous ? "1" : "0"});
    }
}

}  // namespace newsfdi::gazetteer
