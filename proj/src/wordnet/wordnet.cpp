#include "newsfdi/wordnet.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "newsfdi/csv.hpp"
#include "newsfdi/error.hpp"

namespace newsfdi::wordnet {
namespace {

using namespace std::chrono;

Date next_start(Granularity g, Date d) {
    switch (g) {
        case Granularity::pooled:
            return d;
        case Granularity::yearly:
            return Date{d.year() + years{1}, January, day{1}};
        case Granularity::quarterly: {
            const unsigned m = static_cast<unsigned>(d.month());
            const unsigned q_start = ((m - 1) / 3) * 3 + 1;
            const year_month ym = year_month{d.year(), month{q_start}} + months{3};
            return Date{ym.year(), ym.month(), day{1}};
        }
        case Granularity::monthly: {
            const year_month ym = year_month{d.year(), d.month()} + months{1};
            return Date{ym.year(), ym.month(), day{1}};
        }
        case Granularity::daily:
            return Date{sys_days{d} + days{1}};
    }
    return d;
}

}  // namespace

std::string_view granularity_name(Granularity g) {
    switch (g) {
        case Granularity::pooled:
            return "pooled";
        case Granularity::yearly:
            return "yearly";
        case Granularity::quarterly:
            return "quarterly";
        case Granularity::monthly:
            return "monthly";
        case Granularity::daily:
            return "daily";
    }
    return "pooled";
}

std::optional<Granularity> parse_granularity(std::string_view s) {
    for (auto g : {Granularity::pooled, Granularity::yearly, Granularity::quarterly, Granularity::monthly,
                   Granularity::daily}) {
        if (granularity_name(g) == s) return g;
    }
    return std::nullopt;
}

std::vector<Slice> enumerate_slices(Granularity g, Date from, Date to) {
    if (from > to) throw ConfigError("slice window: start is after end");
    if (g == Granularity::pooled) return {Slice{from, to}};
    std::vector<Slice> out;
    Date start = from;
    while (start <= to) {
        const Date next = next_start(g, start);
        const Date last{sys_days{next} - days{1}};
        out.push_back(Slice{start, std::min(last, to)});
        start = next;
    }
    return out;
}

Edge make_edge(const std::string& a, const std::string& b) { return a < b ? Edge{a, b} : Edge{b, a}; }

std::uint64_t CooccurrenceGraph::weight(const std::string& a, const std::string& b) const {
    const auto it = edges.find(make_edge(a, b));
    return it == edges.end() ? 0 : it->second;
}

std::uint64_t CooccurrenceGraph::total_weight() const {
    std::uint64_t total = 0;
    for (const auto& [e, w] : edges) total += w;
    return total;
}

std::vector<std::string> merge_theme_tokens(std::span<const std::string> tokens, const relevance::ThemeQuery& theme) {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) {
        const bool keyword = std::binary_search(theme.keywords.begin(), theme.keywords.end(), t);
        out.push_back(keyword ? theme.canonical_token : t);
    }
    return out;
}

CooccurrenceGraph build_graph(std::span<const std::vector<std::string>> passages, std::size_t window,
                              const relevance::ThemeQuery& theme) {
    if (window < 2) throw ConfigError("co-occurrence window must be at least 2");
    CooccurrenceGraph g;
    g.meta.theme_id = theme.theme_id;
    g.meta.window = window;
    std::set<std::string> ahead;
    for (const auto& raw : passages) {
        const auto tokens = merge_theme_tokens(raw, theme);
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            ++g.node_counts[tokens[i]];
            ahead.clear();
            const std::size_t stop = std::min(tokens.size(), i + window);
            for (std::size_t j = i + 1; j < stop; ++j) {
                if (tokens[j] != tokens[i]) ahead.insert(tokens[j]);
            }
            for (const auto& other : ahead) ++g.edges[make_edge(tokens[i], other)];
        }
    }
    return g;
}

CooccurrenceGraph build_graph(std::span<const corpus::Passage> passages, std::size_t window,
                              const relevance::ThemeQuery& theme) {
    std::vector<std::vector<std::string>> token_lists;
    token_lists.reserve(passages.size());
    for (const auto& p : passages) token_lists.push_back(p.tokens);
    return build_graph(token_lists, window, theme);
}

CooccurrenceGraph merge_graphs(std::span<const CooccurrenceGraph> graphs, bool rollup) {
    CooccurrenceGraph out;
    bool have_meta = false;
    bool same_pruning = true;
    for (const auto& g : graphs) {
        const bool identity = g.meta == GraphMeta{} && g.empty();
        if (identity) continue;
        if (!have_meta) {
            out.meta = g.meta;
            out.pruning = g.pruning;
            have_meta = true;
        } else {
            if (!rollup && (g.meta.region_id != out.meta.region_id || g.meta.theme_id != out.meta.theme_id)) {
                throw ConfigError("merge_graphs: region/theme mismatch (" + out.meta.region_id + "/" +
                                  out.meta.theme_id + " vs " + g.meta.region_id + "/" + g.meta.theme_id +
                                  ") without roll-up");
            }
            if (g.meta.window != out.meta.window) throw ConfigError("merge_graphs: window size mismatch");
            out.meta.slice.start = std::min(out.meta.slice.start, g.meta.slice.start);
            out.meta.slice.end = std::max(out.meta.slice.end, g.meta.slice.end);
            if (g.pruning != out.pruning) same_pruning = false;
        }
        for (const auto& [tok, n] : g.node_counts) out.node_counts[tok] += n;
        for (const auto& [e, w] : g.edges) out.edges[e] += w;
    }
    if (!same_pruning) out.pruning.reset();
    return out;
}

CooccurrenceGraph prune_graph(const CooccurrenceGraph& g, std::uint64_t min_weight, std::size_t max_nodes,
                              const std::string& protected_token) {
    if (min_weight < 1) throw ConfigError("prune_graph: min_weight must be at least 1");
    if (max_nodes < 1) throw ConfigError("prune_graph: max_nodes must be at least 1");
    CooccurrenceGraph out;
    out.meta = g.meta;
    out.pruning = PruneParams{min_weight, max_nodes};
    out.node_counts = g.node_counts;
    for (const auto& [e, w] : g.edges) {
        if (w >= min_weight) out.edges.emplace(e, w);
    }
    if (out.node_counts.size() <= max_nodes) return out;

    std::vector<std::pair<std::string, std::uint64_t>> ranked(out.node_counts.begin(), out.node_counts.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::set<std::string> keep;
    if (out.node_counts.contains(protected_token)) keep.insert(protected_token);
    for (const auto& [tok, n] : ranked) {
        if (keep.size() >= max_nodes) break;
        keep.insert(tok);
    }
    std::erase_if(out.node_counts, [&](const auto& kv) { return !keep.contains(kv.first); });
    std::erase_if(out.edges, [&](const auto& kv) {
        return !keep.contains(kv.first.first) || !keep.contains(kv.first.second);
    });
    return out;
}

void write_graph(const CooccurrenceGraph& g, const std::filesystem::path& stem) {
    std::filesystem::path csv_path = stem;
    csv_path += ".csv";
    std::filesystem::path json_path = stem;
    json_path += ".json";
    {
        std::ofstream out(csv_path, std::ios::binary);
        if (!out) throw DataError("cannot write graph file: " + csv_path.string());
        csv::write_row(out, {"token_a", "token_b", "weight"});
        for (const auto& [e, w] : g.edges) csv::write_row(out, {e.first, e.second, std::to_string(w)});
    }
    nlohmann::ordered_json side;
    side["region_id"] = g.meta.region_id;
    side["theme_id"] = g.meta.theme_id;
    side["slice_start"] = format_date(g.meta.slice.start);
    side["slice_end"] = format_date(g.meta.slice.end);
    side["window"] = g.meta.window;
    if (g.pruning) {
        side["pruning"] = {{"min_weight", g.pruning->min_weight}, {"max_nodes", g.pruning->max_nodes}};
    } else {
        side["pruning"] = nullptr;
    }
    auto nodes = nlohmann::ordered_json::array();
    for (const auto& [tok, n] : g.node_counts) nodes.push_back({tok, n});
    side["node_counts"] = std::move(nodes);
    std::ofstream out(json_path, std::ios::binary);
    if (!out) throw DataError("cannot write graph sidecar: " + json_path.string());
    out << side.dump(1) << '\n';
}

CooccurrenceGraph read_graph(const std::filesystem::path& stem) {
    std::filesystem::path csv_path = stem;
    csv_path += ".csv";
    std::filesystem::path json_path = stem;
    json_path += ".json";

    CooccurrenceGraph g;
    std::ifstream in(json_path, std::ios::binary);
    if (!in) throw DataError("cannot read graph sidecar: " + json_path.string());
    const auto side = nlohmann::json::parse(in, nullptr, false);
    if (side.is_discarded() || !side.is_object()) throw DataError("malformed graph sidecar: " + json_path.string());
    try {
        g.meta.region_id = side.at("region_id").get<std::string>();
        g.meta.theme_id = side.at("theme_id").get<std::string>();
        const auto start = parse_date(side.at("slice_start").get<std::string>());
        const auto end = parse_date(side.at("slice_end").get<std::string>());
        if (!start || !end) throw DataError("bad slice dates in " + json_path.string());
        g.meta.slice = {*start, *end};
        g.meta.window = side.at("window").get<std::size_t>();
        if (!side.at("pruning").is_null()) {
            g.pruning = PruneParams{side["pruning"].at("min_weight").get<std::uint64_t>(),
                                    side["pruning"].at("max_nodes").get<std::size_t>()};
        }
        for (const auto& node : side.at("node_counts")) {
            g.node_counts[node.at(0).get<std::string>()] = node.at(1).get<std::uint64_t>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed graph sidecar " + json_path.string() + ": " + e.what());
    }

    const csv::Table table = csv::read_file(csv_path);
    if (table.header != std::vector<std::string>{"token_a", "token_b", "weight"}) {
        throw DataError("graph edge file header must be token_a,token_b,weight: " + csv_path.string());
    }
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string where = csv_path.string() + ":" + std::to_string(table.line_numbers[r]) + ": ";
        if (row.size() != 3) throw DataError(where + "expected 3 fields");
        std::uint64_t w = 0;
        try {
            std::size_t used = 0;
            w = std::stoull(row[2], &used);
            if (used != row[2].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw DataError(where + "bad weight '" + row[2] + "'");
        }
        if (w == 0) throw DataError(where + "edge weight must be positive");
        if (row[0] == row[1]) throw DataError(where + "self-loop");
        g.edges[make_edge(row[0], row[1])] = w;
    }
    return g;
}

}  // namespace newsfdi::wordnet
