#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "newsfdi/corpus.hpp"

namespace newsfdi::relevance {

inline constexpr std::array<std::string_view, 5> kThemeIds{"land", "labor", "trade", "taxation", "justice"};

bool is_theme_id(std::string_view id);

struct ThemeQuery {
    std::string theme_id;
    std::string canonical_token;       // merged topic node label
    std::vector<std::string> keywords; // normalized, deduplicated, sorted
};

// Builds a query from raw keyword phrases: each phrase is normalized and
// every resulting token becomes a keyword. Throws ConfigError on an unknown
// theme id, an empty keyword set, or a canonical token that is empty,
// contains whitespace, or is a stopword.
ThemeQuery make_theme(std::string theme_id, std::string canonical_token, std::span<const std::string> raw_keywords,
                      const text::StopwordSet& stopwords);

// Theme file: JSON array of {theme_id, canonical_token, keywords: [...]},
// or an object with a "themes" array of the same.
std::vector<ThemeQuery> load_themes(const std::filesystem::path& path, const text::StopwordSet& stopwords);

// Sparse vector over model vocabulary indices, sorted by index.
using SparseVector = std::vector<std::pair<std::size_t, double>>;

// idf(t) = ln((1 + N) / (1 + df(t))) + 1; document weights tf * idf, L2-normalized.
class TfidfModel {
public:
    // Throws DataError if no document has a token.
    static TfidfModel build(std::span<const std::vector<std::string>> documents);

    std::size_t document_count() const { return n_docs_; }
    const std::vector<std::string>& vocabulary() const { return vocab_; }  // lexicographic

    std::optional<std::size_t> index_of(std::string_view term) const;

    // 0 for out-of-vocabulary terms.
    double idf(std::string_view term) const;

    // Out-of-vocabulary tokens are ignored; all-zero input gives an empty vector.
    SparseVector vectorize(std::span<const std::string> tokens) const;

private:
    std::size_t n_docs_ = 0;
    std::vector<std::string> vocab_;
    std::vector<double> idf_;
};

// Cosine of two L2-normalized nonnegative sparse vectors, clamped to [0, 1].
double cosine(const SparseVector& a, const SparseVector& b);

struct RelevanceScore {
    std::string article_id;
    std::size_t passage_index = 0;
    std::string theme_id;
    double score = 0.0;
};

RelevanceScore score_passage(const ThemeQuery& q, const corpus::Passage& p, const TfidfModel& model);

std::vector<RelevanceScore> score_passages(const ThemeQuery& q, std::span<const corpus::Passage> passages,
                                           const TfidfModel& model);

// Passages scoring >= threshold, in input order. Throws ConfigError unless 0 <= threshold <= 1.
std::vector<corpus::Passage> filter_relevant(const ThemeQuery& q, std::span<const corpus::Passage> passages,
                                             const TfidfModel& model, double threshold);

// Terms ranked by summed (normalized) TF-IDF weight across documents, ties lexicographic.
std::vector<std::pair<std::string, double>> suggest_keywords(std::span<const std::vector<std::string>> documents,
                                                             std::size_t top_k);

void write_relevance_header(std::ostream& out);
void write_relevance_row(std::ostream& out, const RelevanceScore& s, bool kept);

}  // namespace newsfdi::relevance
