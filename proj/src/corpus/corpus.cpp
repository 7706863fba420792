#include "newsfdi/corpus.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "newsfdi/error.hpp"

namespace newsfdi::corpus {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 7> kRequired{"id",       "source",   "published_at", "title",
                                                    "body",     "language", "top_traffic"};

constexpr std::array<std::string_view, 36> kAbbreviations{
    "mr",  "mrs", "ms",  "dr",  "prof", "sr",  "jr",  "st",   "mt",  "inc", "ltd", "co",
    "corp", "vs", "etc", "no",  "gen",  "gov", "sen", "rep",  "jan", "feb", "mar", "apr",
    "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec",  "approx", "est", "dept", "fig"};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }

bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

// Word ending right before the period at `dot` is an abbreviation or an initial.
bool abbreviation_before(std::string_view s, std::size_t dot) {
    std::size_t b = dot;
    while (b > 0 && (is_ascii_alpha(s[b - 1]) || s[b - 1] == '.')) --b;
    if (b == dot) return false;
    std::string word(s.substr(b, dot - b));
    std::transform(word.begin(), word.end(), word.begin(), [](unsigned char c) { return std::tolower(c); });
    if (word.size() == 1) return true;
    if (word.find('.') != std::string::npos) return true;  // u.s, e.g
    return std::find(kAbbreviations.begin(), kAbbreviations.end(), word) != kAbbreviations.end();
}

// Length of a closing quote/bracket at i, or 0.
std::size_t closer_length(std::string_view s, std::size_t i) {
    if (i >= s.size()) return 0;
    if (s[i] == '"' || s[i] == '\'' || s[i] == ')') return 1;
    // U+2019 and U+201D
    if (s.substr(i, 3) == "\xE2\x80\x99" || s.substr(i, 3) == "\xE2\x80\x9D") return 3;
    return 0;
}

}  // namespace

bool CorpusFilter::accepts(const Article& a) const {
    if (a.published_at < date_from || a.published_at > date_to) return false;
    if (require_top_traffic && !a.top_traffic) return false;
    if (!language.empty() && a.language != language) return false;
    return true;
}

std::variant<Article, std::string> parse_article(std::string_view line) {
    const json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) return std::string("malformed_json");
    for (auto key : kRequired) {
        if (!doc.contains(std::string(key))) return "missing_field:" + std::string(key);
    }
    for (auto key : kRequired) {
        const auto& value = doc[std::string(key)];
        const bool ok = key == "top_traffic" ? value.is_boolean() : value.is_string();
        if (!ok) return "wrong_type:" + std::string(key);
    }
    Article a;
    a.id = doc["id"].get<std::string>();
    if (a.id.empty()) return std::string("empty_id");
    const auto date = parse_date(doc["published_at"].get<std::string>());
    if (!date) return std::string("invalid_date");
    a.published_at = *date;
    a.source = doc["source"].get<std::string>();
    a.title = doc["title"].get<std::string>();
    a.body = doc["body"].get<std::string>();
    a.language = doc["language"].get<std::string>();
    a.top_traffic = doc["top_traffic"].get<bool>();
    if (a.title.empty() && a.body.empty()) return std::string("empty_content");
    return a;
}

LoadResult load_corpus(const std::filesystem::path& path, const CorpusFilter& filter) {
    if (filter.date_from > filter.date_to) throw ConfigError("corpus filter: date_from is after date_to");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read corpus file: " + path.string());

    LoadResult result;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        auto parsed = parse_article(line);
        if (auto* reason = std::get_if<std::string>(&parsed)) {
            result.rejections.push_back({line_no, std::move(*reason)});
            continue;
        }
        auto& article = std::get<Article>(parsed);
        if (!seen.insert(article.id).second) {
            result.rejections.push_back({line_no, "duplicate_id"});
            continue;
        }
        if (!filter.accepts(article)) {
            ++result.filtered_out;
            continue;
        }
        result.articles.push_back(std::move(article));
    }
    if (in.bad()) throw DataError("I/O error while reading corpus file: " + path.string());
    return result;
}

std::string article_text(const Article& a, bool include_title) {
    if (!include_title || a.title.empty()) return a.body;
    if (a.body.empty()) return a.title;
    return a.title + "\n\n" + a.body;
}

TokenStream tokenize_text(std::string article_id, std::string_view source, const text::StopwordSet& stopwords) {
    TokenStream out;
    out.article_id = std::move(article_id);
    auto words = text::segment(source, stopwords);
    out.tokens.reserve(words.size());
    out.offsets.reserve(words.size());
    for (auto& w : words) {
        out.tokens.push_back(std::move(w.token));
        out.offsets.push_back(w.span);
    }
    return out;
}

TokenStream tokenize(const Article& a, const text::StopwordSet& stopwords, bool include_title) {
    return tokenize_text(a.id, article_text(a, include_title), stopwords);
}

std::vector<text::Span> split_sentences(std::string_view s) {
    std::vector<std::size_t> starts;
    if (s.empty()) return {};
    starts.push_back(0);
    const std::size_t n = s.size();
    for (std::size_t i = 0; i < n; ++i) {
        const char c = s[i];
        if (c == '\n') {
            std::size_t j = i + 1;
            while (j < n && (s[j] == ' ' || s[j] == '\t' || s[j] == '\r')) ++j;
            if (j < n && s[j] == '\n') {
                while (j < n && is_space(s[j])) ++j;
                if (j < n) {
                    starts.push_back(j);
                    i = j - 1;
                }
                continue;
            }
        }
        if (c != '.' && c != '!' && c != '?') continue;
        std::size_t j = i + 1;
        while (std::size_t len = closer_length(s, j)) j += len;
        const std::size_t ws = j;
        while (j < n && is_space(s[j])) ++j;
        if (j == ws || j >= n) continue;
        if (!text::is_uppercase_at(s, j)) continue;
        if (c == '.' && abbreviation_before(s, i)) continue;
        starts.push_back(j);
        i = j - 1;
    }
    std::vector<text::Span> spans;
    spans.reserve(starts.size());
    for (std::size_t k = 0; k < starts.size(); ++k) {
        spans.push_back({starts[k], k + 1 < starts.size() ? starts[k + 1] : n});
    }
    return spans;
}

std::vector<Passage> split_passages(std::string_view source, const TokenStream& stream, std::size_t max_tokens) {
    if (max_tokens == 0) throw ConfigError("split_passages: max_tokens must be positive");
    std::vector<Passage> out;

    struct Open {
        std::size_t begin, end, tok_begin, tok_end;
        std::size_t tokens() const { return tok_end - tok_begin; }
    };
    std::optional<Open> cur;
    auto emit = [&](std::size_t begin, std::size_t end, std::size_t tb, std::size_t te) {
        Passage p;
        p.article_id = stream.article_id;
        p.index = out.size();
        p.span = {begin, end};
        p.tokens.assign(stream.tokens.begin() + static_cast<std::ptrdiff_t>(tb),
                        stream.tokens.begin() + static_cast<std::ptrdiff_t>(te));
        out.push_back(std::move(p));
    };

    std::size_t t = 0;
    for (const auto& sentence : split_sentences(source)) {
        const std::size_t tb = t;
        while (t < stream.offsets.size() && stream.offsets[t].begin < sentence.end) ++t;
        const std::size_t te = t;
        const std::size_t k = te - tb;

        if (cur && cur->tokens() + k <= max_tokens) {
            cur->end = sentence.end;
            cur->tok_end = te;
            continue;
        }
        if (cur && cur->tokens() > 0) {
            emit(cur->begin, cur->end, cur->tok_begin, cur->tok_end);
            cur.reset();
        }
        std::size_t start = cur ? cur->begin : sentence.begin;
        cur.reset();
        if (k <= max_tokens) {
            cur = Open{start, sentence.end, tb, te};
            continue;
        }
        std::size_t chunk = tb;
        while (te - chunk > max_tokens) {
            const std::size_t next = chunk + max_tokens;
            const std::size_t cut = stream.offsets[next].begin;
            emit(start, cut, chunk, next);
            start = cut;
            chunk = next;
        }
        cur = Open{start, sentence.end, chunk, te};
    }
    if (cur) emit(cur->begin, cur->end, cur->tok_begin, cur->tok_end);
    return out;
}

std::vector<Passage> split_passages(const Article& a, const text::StopwordSet& stopwords, std::size_t max_tokens,
                                    bool include_title) {
    const std::string source = article_text(a, include_title);
    return split_passages(source, tokenize_text(a.id, source, stopwords), max_tokens);
}

}  // namespace newsfdi::corpus
