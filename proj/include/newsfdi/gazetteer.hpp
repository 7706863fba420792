#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "newsfdi/corpus.hpp"

namespace newsfdi::gazetteer {

struct RegionRecord {
    std::string region_id;
    std::string country;
    std::string canonical_name;
    std::set<std::string> aliases;  // surface forms; always contains canonical_name
};

// Reads `region_id,country,canonical_name,alias` rows (one alias per row).
// Rows sharing a region_id are merged; a region_id whose rows disagree on
// country or canonical_name, an empty field, or a bad header is fatal
// (DataError naming the line). Records come back sorted by region_id.
std::vector<RegionRecord> load_gazetteer(const std::filesystem::path& path);

enum class Location { title, body };

std::string_view location_name(Location loc);

struct RegionMention {
    std::string article_id;
    std::string region_id;
    std::string alias_matched;  // surface text as it appears in the source
    Location location = Location::body;
    text::Span span;            // into the title or body string
    bool ambiguous = false;
};

enum class AmbiguityPolicy { drop, keep };

// Immutable alias index over normalized token sequences.
class GazetteerIndex {
public:
    explicit GazetteerIndex(std::span<const RegionRecord> records);

    // Regions an alias (any surface form) was inserted for; empty if unknown.
    std::vector<std::string> lookup(std::string_view alias) const;

    bool has_region(const std::string& region_id) const { return regions_.contains(region_id); }
    const std::set<std::string>& region_ids() const { return regions_; }

    // Normalized aliases that map to more than one region.
    std::vector<std::string> collisions() const;

    std::size_t max_alias_tokens() const { return max_len_; }

    // Canonical text dump; identical for any insertion order.
    std::string dump() const;

    // Longest-match-wins tagging over the normalized tokens of `source`.
    std::vector<RegionMention> tag(const std::string& article_id, std::string_view source, Location loc) const;

private:
    static std::string key_of(const std::vector<std::string>& tokens);

    std::map<std::string, std::vector<std::string>> by_alias_;  // key -> sorted region ids
    std::set<std::string> regions_;
    std::size_t max_len_ = 0;
};

// Title mentions first, then body mentions, each in source order.
std::vector<RegionMention> tag_regions(const corpus::Article& a, const GazetteerIndex& idx);

// Articles with at least one qualifying mention of region_id, input order,
// each at most once. Ambiguous mentions qualify only under `keep`. Throws
// DataError for a region_id unknown to the index.
std::vector<corpus::Article> build_region_subcorpus(std::span<const corpus::Article> articles,
                                                    std::span<const RegionMention> mentions,
                                                    const std::string& region_id, const GazetteerIndex& idx,
                                                    AmbiguityPolicy policy = AmbiguityPolicy::drop);

void write_mention_log(std::ostream& out, std::span<const RegionMention> mentions);

}  // namespace newsfdi::gazetteer
