#pragma once

// Text normalization shared by every module that compares words.
//
// Pipeline per word: Unicode word segmentation (UAX #29), case folding,
// canonical decomposition with combining marks removed (Fès -> fes),
// punctuation removed, recomposition. Segments that are pure numbers or
// normalize to nothing are dropped.

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace newsfdi::text {

// Byte range [begin, end) into a UTF-8 source string.
struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;
    friend bool operator==(const Span&, const Span&) = default;
};

struct Word {
    std::string token;
    Span span;
};

using StopwordSet = std::unordered_set<std::string>;

// Normalizes one word. Idempotent: normalize_word(normalize_word(w)) == normalize_word(w).
std::string normalize_word(std::string_view word);

// Segments and normalizes; stopwords and pure numbers are removed.
std::vector<Word> segment(std::string_view utf8, const StopwordSet& stopwords);

// One token per line; entries are normalized on load, '#' starts a comment.
StopwordSet load_stopwords(const std::filesystem::path& path);

// Normalized tokens of a phrase (no stopword removal).
std::vector<std::string> normalize_phrase(std::string_view phrase);

bool is_uppercase_at(std::string_view utf8, std::size_t offset);

}  // namespace newsfdi::text
