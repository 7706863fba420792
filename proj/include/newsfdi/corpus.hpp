#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "newsfdi/date.hpp"
#include "newsfdi/text.hpp"

namespace newsfdi::corpus {

struct Article {
    std::string id;
    std::string source;
    Date published_at{};
    std::string title;
    std::string body;
    std::string language;
    bool top_traffic = false;
};

struct CorpusFilter {
    Date date_from{std::chrono::year{2014}, std::chrono::January, std::chrono::day{1}};
    Date date_to{std::chrono::year{2019}, std::chrono::December, std::chrono::day{31}};
    bool require_top_traffic = true;
    std::string language = "eng";  // empty accepts any language

    bool accepts(const Article& a) const;
};

struct Rejection {
    std::size_t line = 0;
    std::string reason;  // e.g. "missing_field:body", "invalid_date"
};

struct LoadResult {
    std::vector<Article> articles;     // file order
    std::vector<Rejection> rejections; // malformed lines
    std::size_t filtered_out = 0;      // valid lines failing the filter
};

// Throws DataError if the file cannot be read or date_from > date_to.
LoadResult load_corpus(const std::filesystem::path& path, const CorpusFilter& filter);

// Parses one JSON line; returns the rejection reason on failure.
std::variant<Article, std::string> parse_article(std::string_view line);

struct TokenStream {
    std::string article_id;
    std::vector<std::string> tokens;
    std::vector<text::Span> offsets;  // into the source text, parallel to tokens
};

// Text an article contributes downstream: title, a blank line, then body.
std::string article_text(const Article& a, bool include_title);

TokenStream tokenize_text(std::string article_id, std::string_view source, const text::StopwordSet& stopwords);

TokenStream tokenize(const Article& a, const text::StopwordSet& stopwords, bool include_title = true);

struct Passage {
    std::string article_id;
    std::size_t index = 0;
    std::vector<std::string> tokens;
    text::Span span;
};

// Sentence spans partitioning `source`. A boundary follows '.', '!' or '?'
// (plus closing quotes) when whitespace and then an uppercase letter come
// next, unless the word before the period is a known abbreviation or a
// single-letter initial. A blank line is always a boundary.
std::vector<text::Span> split_sentences(std::string_view source);

// Greedily packs whole sentences into passages of at most max_tokens tokens.
// A sentence longer than max_tokens is cut at token starts. The passage
// spans partition `source` exactly. Throws ConfigError if max_tokens == 0.
std::vector<Passage> split_passages(std::string_view source, const TokenStream& stream, std::size_t max_tokens);

std::vector<Passage> split_passages(const Article& a, const text::StopwordSet& stopwords, std::size_t max_tokens,
                                    bool include_title = true);

}  // namespace newsfdi::corpus
