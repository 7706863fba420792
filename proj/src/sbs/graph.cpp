#include <algorithm>
#include <cmath>
#include <numeric>

#include "newsfdi/error.hpp"
#include "newsfdi/sbs.hpp"

namespace newsfdi::sbs {

WeightedGraph WeightedGraph::from_edges(std::size_t node_count, std::span<const InputEdge> edges,
                                        std::vector<std::string> labels) {
    if (!labels.empty() && labels.size() != node_count) {
        throw DataError("graph: label count does not match node count");
    }
    std::vector<std::size_t> degree(node_count, 0);
    for (const auto& e : edges) {
        if (e.a >= node_count || e.b >= node_count) throw DataError("graph: edge endpoint out of range");
        if (e.a == e.b) throw DataError("graph: self-loop on node " + std::to_string(e.a));
        if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
            throw DataError("graph: edge weight must be positive and finite");
        }
        ++degree[e.a];
        ++degree[e.b];
    }
    WeightedGraph g;
    g.labels_ = std::move(labels);
    g.offsets_.assign(node_count + 1, 0);
    for (std::size_t v = 0; v < node_count; ++v) g.offsets_[v + 1] = g.offsets_[v] + degree[v];

    std::vector<std::pair<std::uint32_t, double>> slots(g.offsets_.back());
    std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
    for (const auto& e : edges) {
        slots[fill[e.a]++] = {e.b, e.weight};
        slots[fill[e.b]++] = {e.a, e.weight};
    }
    g.adjacency_.resize(slots.size());
    g.weights_.resize(slots.size());
    for (std::size_t v = 0; v < node_count; ++v) {
        auto first = slots.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v]);
        auto last = slots.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v + 1]);
        std::sort(first, last, [](const auto& x, const auto& y) { return x.first < y.first; });
        for (auto it = first; it != last; ++it) {
            if (it != first && it->first == (it - 1)->first) {
                throw DataError("graph: repeated edge " + std::to_string(v) + "-" + std::to_string(it->first));
            }
            const auto k = static_cast<std::size_t>(it - slots.begin());
            g.adjacency_[k] = it->first;
            g.weights_[k] = it->second;
        }
    }
    return g;
}

WeightedGraph WeightedGraph::from_cooccurrence(const wordnet::CooccurrenceGraph& cg,
                                               std::span<const std::string> extra_nodes) {
    std::vector<std::string> labels;
    labels.reserve(cg.node_counts.size() + extra_nodes.size());
    for (const auto& [tok, n] : cg.node_counts) labels.push_back(tok);
    for (const auto& [e, w] : cg.edges) {
        labels.push_back(e.first);
        labels.push_back(e.second);
    }
    labels.insert(labels.end(), extra_nodes.begin(), extra_nodes.end());
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());

    auto id = [&](const std::string& s) {
        return static_cast<std::uint32_t>(std::lower_bound(labels.begin(), labels.end(), s) - labels.begin());
    };
    std::vector<InputEdge> edges;
    edges.reserve(cg.edges.size());
    for (const auto& [e, w] : cg.edges) edges.push_back({id(e.first), id(e.second), static_cast<double>(w)});
    const std::size_t n = labels.size();
    return from_edges(n, edges, std::move(labels));
}

std::optional<std::size_t> WeightedGraph::index_of(std::string_view label) const {
    const auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
    if (it == labels_.end() || *it != label) return std::nullopt;
    return static_cast<std::size_t>(it - labels_.begin());
}

}  // namespace newsfdi::sbs
