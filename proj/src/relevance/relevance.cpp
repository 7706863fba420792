#include "newsfdi/relevance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "newsfdi/csv.hpp"
#include "newsfdi/error.hpp"
#include "newsfdi/format.hpp"

namespace newsfdi::relevance {

bool is_theme_id(std::string_view id) {
    return std::find(kThemeIds.begin(), kThemeIds.end(), id) != kThemeIds.end();
}

ThemeQuery make_theme(std::string theme_id, std::string canonical_token, std::span<const std::string> raw_keywords,
                      const text::StopwordSet& stopwords) {
    if (!is_theme_id(theme_id)) throw ConfigError("unknown theme_id '" + theme_id + "'");
    if (canonical_token.empty() || canonical_token.find_first_of(" \t\r\n") != std::string::npos) {
        throw ConfigError("theme '" + theme_id + "': canonical_token must be a single non-empty token");
    }
    if (stopwords.contains(text::normalize_word(canonical_token))) {
        throw ConfigError("theme '" + theme_id + "': canonical_token '" + canonical_token + "' is a stopword");
    }
    ThemeQuery q{std::move(theme_id), std::move(canonical_token), {}};
    for (const auto& phrase : raw_keywords) {
        for (auto& tok : text::segment(phrase, stopwords)) q.keywords.push_back(std::move(tok.token));
    }
    std::sort(q.keywords.begin(), q.keywords.end());
    q.keywords.erase(std::unique(q.keywords.begin(), q.keywords.end()), q.keywords.end());
    if (q.keywords.empty()) throw ConfigError("theme '" + q.theme_id + "': keyword list is empty after normalization");
    return q;
}

std::vector<ThemeQuery> load_themes(const std::filesystem::path& path, const text::StopwordSet& stopwords) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read theme file: " + path.string());
    const nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw ConfigError("theme file is not valid JSON: " + path.string());
    const nlohmann::json& list = doc.is_object() && doc.contains("themes") ? doc["themes"] : doc;
    if (!list.is_array()) throw ConfigError("theme file must hold an array of themes: " + path.string());

    std::vector<ThemeQuery> out;
    for (const auto& item : list) {
        if (!item.is_object() || !item.contains("theme_id") || !item.contains("canonical_token") ||
            !item.contains("keywords") || !item["keywords"].is_array()) {
            throw ConfigError("theme entry needs theme_id, canonical_token and keywords[]: " + path.string());
        }
        std::vector<std::string> keywords;
        for (const auto& k : item["keywords"]) keywords.push_back(k.get<std::string>());
        out.push_back(make_theme(item["theme_id"].get<std::string>(), item["canonical_token"].get<std::string>(),
                                 keywords, stopwords));
        for (std::size_t i = 0; i + 1 < out.size(); ++i) {
            if (out[i].theme_id == out.back().theme_id) {
                throw ConfigError("duplicate theme_id '" + out.back().theme_id + "' in " + path.string());
            }
        }
    }
    return out;
}

TfidfModel TfidfModel::build(std::span<const std::vector<std::string>> documents) {
    std::map<std::string, std::size_t> df;
    std::size_t nonempty = 0;
    for (const auto& doc : documents) {
        if (!doc.empty()) ++nonempty;
        std::vector<std::string> uniq(doc.begin(), doc.end());
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        for (auto& t : uniq) ++df[t];
    }
    if (nonempty == 0) throw DataError("TF-IDF model needs at least one non-empty document");

    TfidfModel m;
    m.n_docs_ = documents.size();
    m.vocab_.reserve(df.size());
    m.idf_.reserve(df.size());
    const double n = static_cast<double>(m.n_docs_);
    for (const auto& [term, count] : df) {
        m.vocab_.push_back(term);
        m.idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
    }
    return m;
}

std::optional<std::size_t> TfidfModel::index_of(std::string_view term) const {
    const auto it = std::lower_bound(vocab_.begin(), vocab_.end(), term);
    if (it == vocab_.end() || *it != term) return std::nullopt;
    return static_cast<std::size_t>(it - vocab_.begin());
}

double TfidfModel::idf(std::string_view term) const {
    const auto i = index_of(term);
    return i ? idf_[*i] : 0.0;
}

SparseVector TfidfModel::vectorize(std::span<const std::string> tokens) const {
    std::map<std::size_t, double> tf;
    for (const auto& t : tokens) {
        if (const auto i = index_of(t)) tf[*i] += 1.0;
    }
    SparseVector v;
    v.reserve(tf.size());
    double norm2 = 0.0;
    for (const auto& [i, count] : tf) {
        const double w = count * idf_[i];
        v.emplace_back(i, w);
        norm2 += w * w;
    }
    if (norm2 == 0.0) return {};
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& [i, w] : v) w *= inv;
    return v;
}

double cosine(const SparseVector& a, const SparseVector& b) {
    double acc = 0.0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (ia->first < ib->first) {
            ++ia;
        } else if (ib->first < ia->first) {
            ++ib;
        } else {
            acc += ia->second * ib->second;
            ++ia;
            ++ib;
        }
    }
    return std::clamp(acc, 0.0, 1.0);
}

RelevanceScore score_passage(const ThemeQuery& q, const corpus::Passage& p, const TfidfModel& model) {
    return {p.article_id, p.index, q.theme_id, cosine(model.vectorize(q.keywords), model.vectorize(p.tokens))};
}

std::vector<RelevanceScore> score_passages(const ThemeQuery& q, std::span<const corpus::Passage> passages,
                                           const TfidfModel& model) {
    const SparseVector query = model.vectorize(q.keywords);
    std::vector<RelevanceScore> out;
    out.reserve(passages.size());
    for (const auto& p : passages) {
        out.push_back({p.article_id, p.index, q.theme_id, cosine(query, model.vectorize(p.tokens))});
    }
    return out;
}

std::vector<corpus::Passage> filter_relevant(const ThemeQuery& q, std::span<const corpus::Passage> passages,
                                             const TfidfModel& model, double threshold) {
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("relevance threshold must lie in [0, 1]");
    const auto scores = score_passages(q, passages, model);
    std::vector<corpus::Passage> kept;
    for (std::size_t i = 0; i < passages.size(); ++i) {
        if (scores[i].score >= threshold) kept.push_back(passages[i]);
    }
    return kept;
}

std::vector<std::pair<std::string, double>> suggest_keywords(std::span<const std::vector<std::string>> documents,
                                                             std::size_t top_k) {
    if (top_k == 0) return {};
    const TfidfModel model = TfidfModel::build(documents);
    std::vector<double> mass(model.vocabulary().size(), 0.0);
    for (const auto& doc : documents) {
        for (const auto& [i, w] : model.vectorize(doc)) mass[i] += w;
    }
    std::vector<std::pair<std::string, double>> ranked;
    ranked.reserve(mass.size());
    for (std::size_t i = 0; i < mass.size(); ++i) ranked.emplace_back(model.vocabulary()[i], mass[i]);
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > top_k) ranked.resize(top_k);
    return ranked;
}

void write_relevance_header(std::ostream& out) {
    csv::write_row(out, {"article_id", "passage_index", "theme_id", "score", "kept"});
}

void write_relevance_row(std::ostream& out, const RelevanceScore& s, bool kept) {
    csv::write_row(out, {s.article_id, std::to_string(s.passage_index), s.theme_id, format_real(s.score),
                         kept ? "1" : "0"});
}

}  // namespace newsfdi::relevance
