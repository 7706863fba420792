#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "newsfdi/corpus.hpp"
#include "newsfdi/date.hpp"
#include "newsfdi/relevance.hpp"

namespace newsfdi::wordnet {

enum class Granularity { pooled, yearly, quarterly, monthly, daily };

std::string_view granularity_name(Granularity g);
std::optional<Granularity> parse_granularity(std::string_view s);

struct Slice {
    Date start{};
    Date end{};  // inclusive
    friend bool operator==(const Slice&, const Slice&) = default;
};

// Calendar slices covering [from, to], clipped to the window.
std::vector<Slice> enumerate_slices(Granularity g, Date from, Date to);

struct GraphMeta {
    std::string region_id;
    std::string theme_id;
    Slice slice{};
    std::size_t window = 0;
    friend bool operator==(const GraphMeta&, const GraphMeta&) = default;
};

struct PruneParams {
    std::uint64_t min_weight = 2;
    std::size_t max_nodes = 5000;
    friend bool operator==(const PruneParams&, const PruneParams&) = default;
};

using Edge = std::pair<std::string, std::string>;  // first < second

// Weighted undirected co-occurrence graph. node_counts holds every counted
// token with its occurrence count (isolated tokens included).
struct CooccurrenceGraph {
    GraphMeta meta;
    std::map<std::string, std::uint64_t> node_counts;
    std::map<Edge, std::uint64_t> edges;
    std::optional<PruneParams> pruning;

    std::uint64_t weight(const std::string& a, const std::string& b) const;
    std::uint64_t total_weight() const;
    bool empty() const { return node_counts.empty(); }

    friend bool operator==(const CooccurrenceGraph&, const CooccurrenceGraph&) = default;
};

Edge make_edge(const std::string& a, const std::string& b);

// Replaces theme keywords with the theme's canonical token.
std::vector<std::string> merge_theme_tokens(std::span<const std::string> tokens, const relevance::ThemeQuery& theme);

// Sliding-window counting: for each position i, every distinct token among
// the next window-1 positions (other than token i itself) co-occurs once
// with token i. Windows never cross passage boundaries. Theme keywords are
// merged into the canonical token first. Throws ConfigError if window < 2.
CooccurrenceGraph build_graph(std::span<const std::vector<std::string>> passages, std::size_t window,
                              const relevance::ThemeQuery& theme);

CooccurrenceGraph build_graph(std::span<const corpus::Passage> passages, std::size_t window,
                              const relevance::ThemeQuery& theme);

// Sums edge weights and node counts. Graphs must share region, theme and
// window unless `rollup` is set (then region/theme of the first non-empty
// graph are kept and slices are spanned). A default-constructed graph is
// the identity. Throws ConfigError on a mismatch.
CooccurrenceGraph merge_graphs(std::span<const CooccurrenceGraph> graphs, bool rollup = false);

// Drops edges lighter than min_weight, then keeps at most max_nodes nodes by
// occurrence count (ties lexicographic). `protected_token` always survives.
CooccurrenceGraph prune_graph(const CooccurrenceGraph& g, std::uint64_t min_weight, std::size_t max_nodes,
                              const std::string& protected_token);

// `stem.csv` (token_a,token_b,weight) plus `stem.json` sidecar.
void write_graph(const CooccurrenceGraph& g, const std::filesystem::path& stem);
CooccurrenceGraph read_graph(const std::filesystem::path& stem);

}  // namespace newsfdi::wordnet
