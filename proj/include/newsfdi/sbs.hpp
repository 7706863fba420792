#pragma once

// Semantic Brand Score of a theme's canonical node: standardized
// prevalence + distinctiveness (diversity) + weighted betweenness
// (connectivity), each standardized across the nodes of one graph.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "newsfdi/relevance.hpp"
#include "newsfdi/stats.hpp"
#include "newsfdi/wordnet.hpp"

namespace newsfdi::sbs {

// Relative tolerance under which two path lengths count as equally short.
inline constexpr double kPathTieTolerance = 1e-10;

// Compressed sparse adjacency; node ids follow the lexicographic order of labels.
class WeightedGraph {
public:
    struct InputEdge {
        std::uint32_t a;
        std::uint32_t b;
        double weight;
    };

    // Throws DataError on a self-loop, an out-of-range endpoint, a repeated
    // pair, or a weight that is not strictly positive.
    static WeightedGraph from_edges(std::size_t node_count, std::span<const InputEdge> edges,
                                    std::vector<std::string> labels = {});

    // `extra_nodes` are added as isolated nodes if not already present.
    static WeightedGraph from_cooccurrence(const wordnet::CooccurrenceGraph& g,
                                           std::span<const std::string> extra_nodes = {});

    std::size_t node_count() const { return offsets_.size() - 1; }
    std::size_t edge_count() const { return adjacency_.size() / 2; }
    std::size_t degree(std::size_t v) const { return offsets_[v + 1] - offsets_[v]; }

    std::span<const std::uint32_t> neighbors(std::size_t v) const {
        return {adjacency_.data() + offsets_[v], degree(v)};
    }
    std::span<const double> weights(std::size_t v) const { return {weights_.data() + offsets_[v], degree(v)}; }

    const std::vector<std::string>& labels() const { return labels_; }
    std::optional<std::size_t> index_of(std::string_view label) const;

    const std::vector<std::size_t>& offsets() const { return offsets_; }

private:
    std::vector<std::size_t> offsets_{0};
    std::vector<std::uint32_t> adjacency_;
    std::vector<double> weights_;
    std::vector<std::string> labels_;
};

// Occurrences of `token` across passages. With a theme, keywords are first
// merged into the canonical token.
std::uint64_t prevalence(std::span<const std::vector<std::string>> passages, const std::string& token,
                         const relevance::ThemeQuery* theme = nullptr);

// D(i) = sum over neighbours j of w_ij * log10((n - 1) / deg(j)).
// Throws DataError when the graph has fewer than two nodes.
std::vector<double> distinctiveness_all(const WeightedGraph& g);
double distinctiveness(const wordnet::CooccurrenceGraph& g, const std::string& token);

// Exact weighted betweenness, unordered pairs, endpoints excluded, no
// normalization; edge length is 1 / weight. Sources are processed in fixed
// blocks and the block sums are reduced in order, so the result does not
// depend on `threads` (0 = all hardware threads).
std::vector<double> betweenness_all(const WeightedGraph& g, unsigned threads = 1);
double weighted_betweenness(const wordnet::CooccurrenceGraph& g, const std::string& token, unsigned threads = 1);

// z-scores with the population sd; all zeros when the values are constant.
std::vector<double> standardize(std::span<const double> values);

struct Provenance {
    std::size_t window = 0;
    std::optional<wordnet::PruneParams> pruning;
    double relevance_threshold = 0.0;
    std::size_t passages = 0;
    std::size_t nodes = 0;
    std::size_t edges = 0;
    bool canonical_present = false;
};

struct SbsScore {
    std::string region_id;
    std::string theme_id;
    wordnet::Slice slice{};
    std::uint64_t prevalence = 0;
    double diversity = 0.0;
    double connectivity = 0.0;
    double z_prevalence = 0.0;
    double z_diversity = 0.0;
    double z_connectivity = 0.0;
    double sbs_raw = 0.0;      // z_prevalence + z_diversity + z_connectivity
    double sbs_shifted = 0.0;  // sbs_raw minus the theme/slice minimum across regions
    Provenance provenance;
};

// Scores the theme's canonical token in `g`. `passages` are the relevant
// passages' raw tokens (keywords not yet merged). If the canonical token is
// absent it joins the node population as an isolated node with zero counts.
SbsScore compute_sbs(const wordnet::CooccurrenceGraph& g, std::span<const std::vector<std::string>> passages,
                     const relevance::ThemeQuery& theme, unsigned threads = 1);

// Fills sbs_shifted per (theme, slice) group.
void apply_min_shift(std::span<SbsScore> scores);

// Per theme: distribution of sbs_shifted across regions, in first-seen theme order.
std::vector<stats::SummaryRow> sbs_table(std::span<const SbsScore> scores);

std::string theme_label(std::string_view theme_id);  // "SBS land"

void write_scores(std::ostream& out, std::span<const SbsScore> scores);
std::vector<SbsScore> read_scores(const std::filesystem::path& path);
void write_provenance(std::ostream& out, std::span<const SbsScore> scores);

}  // namespace newsfdi::sbs
