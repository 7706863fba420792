#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "newsfdi/error.hpp"
#include "newsfdi/kernels.hpp"
#include "newsfdi/parallel.hpp"
#include "newsfdi/sbs.hpp"

namespace newsfdi::sbs {
namespace {

// Per-worker scratch for one single-source pass.
struct BrandesWorkspace {
    explicit BrandesWorkspace(const WeightedGraph& g)
        : dist(g.node_count()),
          sigma(g.node_count()),
          delta(g.node_count()),
          settled(g.node_count()),
          pred_count(g.node_count()),
          pred(g.offsets().back()) {
        order.reserve(g.node_count());
    }

    std::vector<double> dist;
    std::vector<double> sigma;
    std::vector<double> delta;
    std::vector<char> settled;
    std::vector<std::size_t> pred_count;
    std::vector<std::uint32_t> pred;  // pred of w live in [offsets[w], offsets[w] + pred_count[w])
    std::vector<std::uint32_t> order; // settlement order
};

using HeapEntry = std::pair<double, std::uint32_t>;

// Adds the dependencies of source s onto acc (ordered-pair convention).
void accumulate_source(const WeightedGraph& g, std::span<const double> length, std::uint32_t s,
                       BrandesWorkspace& ws, std::vector<double>& acc) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::fill(ws.dist.begin(), ws.dist.end(), inf);
    std::fill(ws.sigma.begin(), ws.sigma.end(), 0.0);
    std::fill(ws.delta.begin(), ws.delta.end(), 0.0);
    std::fill(ws.settled.begin(), ws.settled.end(), 0);
    std::fill(ws.pred_count.begin(), ws.pred_count.end(), 0);
    ws.order.clear();

    const auto& off = g.offsets();
    std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>> heap;
    ws.dist[s] = 0.0;
    ws.sigma[s] = 1.0;
    heap.emplace(0.0, s);

    while (!heap.empty()) {
        const auto [d, v] = heap.top();
        heap.pop();
        if (ws.settled[v] || d > ws.dist[v]) continue;
        ws.settled[v] = 1;
        ws.order.push_back(v);
        const auto nbrs = g.neighbors(v);
        for (std::size_t k = 0; k < nbrs.size(); ++k) {
            const std::uint32_t w = nbrs[k];
            if (ws.settled[w]) continue;
            const double alt = d + length[off[v] + k];
            double& dw = ws.dist[w];
            const double tol = kPathTieTolerance * (dw == inf ? alt : dw);
            if (alt < dw - tol) {
                dw = alt;
                ws.sigma[w] = ws.sigma[v];
                ws.pred[off[w]] = v;
                ws.pred_count[w] = 1;
                heap.emplace(alt, w);
            } else if (alt <= dw + tol) {
                ws.sigma[w] += ws.sigma[v];
                ws.pred[off[w] + ws.pred_count[w]++] = v;
            }
        }
    }

    for (auto it = ws.order.rbegin(); it != ws.order.rend(); ++it) {
        const std::uint32_t w = *it;
        const double coeff = (1.0 + ws.delta[w]) / ws.sigma[w];
        for (std::size_t p = 0; p < ws.pred_count[w]; ++p) {
            const std::uint32_t v = ws.pred[off[w] + p];
            ws.delta[v] += ws.sigma[v] * coeff;
        }
        if (w != s) acc[w] += ws.delta[w];
    }
}

// Block size depends only on n so the reduction order is fixed.
std::size_t source_block(std::size_t n) { return std::max<std::size_t>(32, (n + 63) / 64); }

}  // namespace

std::vector<double> betweenness_all(const WeightedGraph& g, unsigned threads) {
    const std::size_t n = g.node_count();
    std::vector<double> result(n, 0.0);
    if (n < 3) return result;

    std::vector<double> length(g.offsets().back());
    for (std::size_t v = 0; v < n; ++v) {
        const auto w = g.weights(v);
        for (std::size_t k = 0; k < w.size(); ++k) length[g.offsets()[v] + k] = 1.0 / w[k];
    }

    const std::size_t block = source_block(n);
    const std::size_t blocks = (n + block - 1) / block;
    std::vector<std::vector<double>> partial(blocks);
    parallel_for(blocks, threads, [&](std::size_t b) {
        BrandesWorkspace ws(g);
        std::vector<double> acc(n, 0.0);
        const std::size_t last = std::min(n, (b + 1) * block);
        for (std::size_t s = b * block; s < last; ++s) {
            accumulate_source(g, length, static_cast<std::uint32_t>(s), ws, acc);
        }
        partial[b] = std::move(acc);
    });
    for (const auto& p : partial) kernels::axpy(1.0, p, result);
    for (auto& x : result) x *= 0.5;  // each unordered pair was counted from both ends
    return result;
}

double weighted_betweenness(const wordnet::CooccurrenceGraph& cg, const std::string& token, unsigned threads) {
    const auto g = WeightedGraph::from_cooccurrence(cg);
    const auto i = g.index_of(token);
    if (!i) return 0.0;
    return betweenness_all(g, threads)[*i];
}

std::vector<double> distinctiveness_all(const WeightedGraph& g) {
    const std::size_t n = g.node_count();
    if (n < 2) throw DataError("distinctiveness needs a graph with at least two nodes");
    const double top = static_cast<double>(n - 1);
    std::vector<double> factor(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        if (g.degree(j) > 0) factor[j] = std::log10(top / static_cast<double>(g.degree(j)));
    }
    // Neighbour factors laid out parallel to the CSR weights.
    std::vector<double> edge_factor(g.offsets().back());
    for (std::size_t i = 0; i < n; ++i) {
        const auto nbrs = g.neighbors(i);
        for (std::size_t k = 0; k < nbrs.size(); ++k) edge_factor[g.offsets()[i] + k] = factor[nbrs[k]];
    }
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto w = g.weights(i);
        out[i] = kernels::dot(w, std::span<const double>(edge_factor.data() + g.offsets()[i], w.size()));
    }
    return out;
}

double distinctiveness(const wordnet::CooccurrenceGraph& cg, const std::string& token) {
    const auto g = WeightedGraph::from_cooccurrence(cg);
    const auto values = distinctiveness_all(g);
    const auto i = g.index_of(token);
    return i ? values[*i] : 0.0;
}

std::vector<double> standardize(std::span<const double> values) {
    std::vector<double> z(values.size(), 0.0);
    if (values.empty()) return z;
    if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; })) return z;
    const double n = static_cast<double>(values.size());
    const double mean = kernels::sum(values) / n;
    const double sd = std::sqrt(kernels::sum_sq_dev(values, mean) / n);
    if (!(sd > 0.0)) return z;
    for (std::size_t i = 0; i < values.size(); ++i) z[i] = (values[i] - mean) / sd;
    return z;
}

}  // namespace newsfdi::sbs
