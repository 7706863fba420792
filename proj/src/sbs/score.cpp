#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include <nlohmann/json.hpp>

#include "newsfdi/csv.hpp"
#include "newsfdi/error.hpp"
#include "newsfdi/format.hpp"
#include "newsfdi/sbs.hpp"

namespace newsfdi::sbs {
namespace {

const std::vector<std::string> kScoreHeader{"region_id", "theme_id", "slice_start", "slice_end",
                                            "prevalence", "diversity", "connectivity", "z_prev",
                                            "z_div", "z_conn", "sbs_raw", "sbs_shifted"};

double parse_double(const std::string& s, const std::string& where) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw DataError(where + "bad number '" + s + "'");
    return v;
}

}  // namespace

std::uint64_t prevalence(std::span<const std::vector<std::string>> passages, const std::string& token,
                         const relevance::ThemeQuery* theme) {
    std::uint64_t count = 0;
    for (const auto& p : passages) {
        if (theme) {
            for (const auto& t : wordnet::merge_theme_tokens(p, *theme)) count += t == token;
        } else {
            count += static_cast<std::uint64_t>(std::count(p.begin(), p.end(), token));
        }
    }
    return count;
}

SbsScore compute_sbs(const wordnet::CooccurrenceGraph& g, std::span<const std::vector<std::string>> passages,
                     const relevance::ThemeQuery& theme, unsigned threads) {
    const std::string& canonical = theme.canonical_token;
    const std::vector<std::string> extra{canonical};
    const WeightedGraph wg = WeightedGraph::from_cooccurrence(g, extra);
    const std::size_t n = wg.node_count();
    const std::size_t target = *wg.index_of(canonical);

    std::vector<double> prev(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto it = g.node_counts.find(wg.labels()[i]);
        prev[i] = it == g.node_counts.end() ? 0.0 : static_cast<double>(it->second);
    }
    const std::vector<double> div = n >= 2 ? distinctiveness_all(wg) : std::vector<double>(n, 0.0);
    const std::vector<double> conn = betweenness_all(wg, threads);

    const auto zp = standardize(prev);
    const auto zd = standardize(div);
    const auto zc = standardize(conn);

    SbsScore s;
    s.region_id = g.meta.region_id;
    s.theme_id = theme.theme_id;
    s.slice = g.meta.slice;
    s.prevalence = prevalence(passages, canonical, &theme);
    s.diversity = div[target];
    s.connectivity = conn[target];
    s.z_prevalence = zp[target];
    s.z_diversity = zd[target];
    s.z_connectivity = zc[target];
    s.sbs_raw = s.z_prevalence + s.z_diversity + s.z_connectivity;
    s.sbs_shifted = s.sbs_raw;
    s.provenance.window = g.meta.window;
    s.provenance.pruning = g.pruning;
    s.provenance.passages = passages.size();
    s.provenance.nodes = n;
    s.provenance.edges = wg.edge_count();
    s.provenance.canonical_present = g.node_counts.contains(canonical);
    return s;
}

void apply_min_shift(std::span<SbsScore> scores) {
    std::map<std::tuple<std::string, std::string, std::string>, double> minimum;
    auto key = [](const SbsScore& s) {
        return std::make_tuple(s.theme_id, format_date(s.slice.start), format_date(s.slice.end));
    };
    for (const auto& s : scores) {
        auto [it, inserted] = minimum.try_emplace(key(s), s.sbs_raw);
        if (!inserted) it->second = std::min(it->second, s.sbs_raw);
    }
    for (auto& s : scores) s.sbs_shifted = s.sbs_raw - minimum.at(key(s));
}

std::string theme_label(std::string_view theme_id) { return "SBS " + std::string(theme_id); }

std::vector<stats::SummaryRow> sbs_table(std::span<const SbsScore> scores) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<double>> by_theme;
    for (const auto& s : scores) {
        auto [it, inserted] = by_theme.try_emplace(s.theme_id);
        if (inserted) order.push_back(s.theme_id);
        it->second.push_back(s.sbs_shifted);
    }
    std::vector<stats::SummaryRow> rows;
    for (const auto& theme : order) rows.push_back(stats::summarize(theme_label(theme), by_theme[theme]));
    return rows;
}

void write_scores(std::ostream& out, std::span<const SbsScore> scores) {
    csv::write_row(out, kScoreHeader);
    for (const auto& s : scores) {
        csv::write_row(out, {s.region_id, s.theme_id, format_date(s.slice.start), format_date(s.slice.end),
                             std::to_string(s.prevalence), format_real(s.diversity), format_real(s.connectivity),
                             format_real(s.z_prevalence), format_real(s.z_diversity),
                             format_real(s.z_connectivity), format_real(s.sbs_raw), format_real(s.sbs_shifted)});
    }
}

std::vector<SbsScore> read_scores(const std::filesystem::path& path) {
    const csv::Table table = csv::read_file(path);
    if (table.header != kScoreHeader) throw DataError("unexpected score file header: " + path.string());
    std::vector<SbsScore> out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string where = path.string() + ":" + std::to_string(table.line_numbers[r]) + ": ";
        if (row.size() != kScoreHeader.size()) throw DataError(where + "wrong field count");
        SbsScore s;
        s.region_id = row[0];
        s.theme_id = row[1];
        const auto start = parse_date(row[2]);
        const auto end = parse_date(row[3]);
        if (!start || !end) throw DataError(where + "bad slice date");
        s.slice = {*start, *end};
        const double prev = parse_double(row[4], where);
        if (prev < 0 || prev != std::floor(prev)) throw DataError(where + "prevalence must be a count");
        s.prevalence = static_cast<std::uint64_t>(prev);
        s.diversity = parse_double(row[5], where);
        s.connectivity = parse_double(row[6], where);
        s.z_prevalence = parse_double(row[7], where);
        s.z_diversity = parse_double(row[8], where);
        s.z_connectivity = parse_double(row[9], where);
        s.sbs_raw = parse_double(row[10], where);
        s.sbs_shifted = parse_double(row[11], where);
        out.push_back(std::move(s));
    }
    return out;
}

void write_provenance(std::ostream& out, std::span<const SbsScore> scores) {
    nlohmann::ordered_json doc;
    doc["distance_transform"] = "inverse_weight";
    doc["distinctiveness"] = "sum_j w_ij * log10((n-1)/deg(j))";
    doc["betweenness"] = "exact, unordered pairs, unnormalized";
    doc["standardization"] = "population sd over graph nodes";
    doc["shift"] = "sbs_shifted = sbs_raw - min over regions per theme and slice";
    auto rows = nlohmann::ordered_json::array();
    for (const auto& s : scores) {
        nlohmann::ordered_json row;
        row["region_id"] = s.region_id;
        row["theme_id"] = s.theme_id;
        row["slice_start"] = format_date(s.slice.start);
        row["slice_end"] = format_date(s.slice.end);
        row["window"] = s.provenance.window;
        if (s.provenance.pruning) {
            row["min_weight"] = s.provenance.pruning->min_weight;
            row["max_nodes"] = s.provenance.pruning->max_nodes;
        } else {
            row["min_weight"] = nullptr;
            row["max_nodes"] = nullptr;
        }
        row["relevance_threshold"] = s.provenance.relevance_threshold;
        row["passages"] = s.provenance.passages;
        row["nodes"] = s.provenance.nodes;
        row["edges"] = s.provenance.edges;
        row["canonical_present"] = s.provenance.canonical_present;
        rows.push_back(std::move(row));
    }
    doc["scores"] = std::move(rows);
    out << doc.dump(1) << '\n';
}

}  // namespace newsfdi::sbs
