#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "newsfdi/csv.hpp"
#include "newsfdi/error.hpp"
#include "newsfdi/format.hpp"
#include "newsfdi/parallel.hpp"
#include "newsfdi/relevance.hpp"
#include "newsfdi/sbs.hpp"
#include "newsfdi/stats.hpp"
#include "newsfdi/table_text.hpp"
#include "stages.hpp"

namespace newsfdi::pipeline::detail {
namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

ordered_json filter_json(const Config& cfg) {
    ordered_json j;
    j["date_from"] = format_date(cfg.filter.date_from);
    j["date_to"] = format_date(cfg.filter.date_to);
    j["require_top_traffic"] = cfg.filter.require_top_traffic;
    j["language"] = cfg.filter.language;
    return j;
}

ordered_json spec_json(const econ::RegressionSpec& s) {
    ordered_json j;
    j["table"] = s.table;
    j["name"] = s.name;
    j["dependent"] = s.dependent;
    j["obstacles"] = s.obstacles;
    j["sbs_theme"] = s.sbs_theme.value_or("");
    j["interact"] = s.interact.value_or("");
    j["controls"] = s.controls;
    j["country_fe"] = s.country_fe;
    j["sector_fe"] = s.sector_fe;
    j["instruments"] = econ::instrument_variant_name(s.instruments);
    j["se"] = econ::se_type_name(s.se);
    return j;
}

std::string slug(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        else if (!out.empty() && out.back() != '_')
            out += '_';
    }
    while (!out.empty() && out.back() == '_') out.pop_back();
    return out.empty() ? "unnamed" : out;
}

void check_region_id(const std::string& id) {
    if (id.empty() || id.front() == '.' || id.find_first_of("/\\") != std::string::npos)
        throw DataError("region_id is not usable as a file name: '" + id + "'");
}

std::vector<std::string> read_lines(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError("cannot read " + p.string());
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) out.push_back(line);
    return out;
}

std::string titled(const std::string& title, const std::string& body) { return title + "\n\n" + body; }

struct FirmData {
    econ::FirmLoadResult loaded;
    econ::DeriveResult derived;
    std::vector<gazetteer::RegionRecord> regions;
};

FirmData load_firm_data(const Config& cfg) {
    FirmData d;
    d.regions = gazetteer::load_gazetteer(cfg.paths.gazetteer);
    std::set<std::string> ids;
    for (const auto& r : d.regions) ids.insert(r.region_id);
    d.loaded = econ::load_firms(cfg.paths.firms, &ids);
    d.derived = econ::derive_controls(d.loaded.firms);
    return d;
}

std::string rejections_csv(const FirmData& d) {
    std::ostringstream out;
    csv::write_row(out, {"stage", "line", "firm_id", "reason"});
    for (const auto& r : d.loaded.rejections) csv::write_row(out, {"load", std::to_string(r.line), r.firm_id, r.reason});
    for (const auto& r : d.derived.rejections)
        csv::write_row(out, {"derive", std::to_string(r.line), r.firm_id, r.reason});
    return out.str();
}

}  // namespace

ordered_json stage_params(Stage s, const Config& cfg) {
    ordered_json j;
    j["format"] = 1;
    switch (s) {
        case Stage::ingest:
            j["filter"] = filter_json(cfg);
            j["ambiguous"] = cfg.ambiguous == gazetteer::AmbiguityPolicy::drop ? "drop" : "keep";
            break;
        case Stage::score:
            j["filter"] = filter_json(cfg);
            j["include_title"] = cfg.include_title;
            j["max_passage_tokens"] = cfg.max_passage_tokens;
            j["relevance_threshold"] = cfg.relevance_threshold;
            j["window"] = cfg.window;
            j["min_weight"] = cfg.pruning.min_weight;
            j["max_nodes"] = cfg.pruning.max_nodes;
            j["granularity"] = wordnet::granularity_name(cfg.granularity);
            break;
        case Stage::regress: {
            auto models = ordered_json::array();
            for (const auto& m : cfg.models) models.push_back(spec_json(m));
            j["models"] = models;
            j["ttest_themes"] = cfg.ttest_themes;
            j["granularity"] = wordnet::granularity_name(cfg.granularity);
            j["montecarlo"] = {{"enabled", cfg.montecarlo.enabled},
                               {"reps", cfg.montecarlo.reps},
                               {"n", cfg.montecarlo.n},
                               {"beta", cfg.montecarlo.beta}};
            j["seed"] = cfg.seed;
            break;
        }
        case Stage::describe:
            j["granularity"] = wordnet::granularity_name(cfg.granularity);
            break;
    }
    return j;
}

std::vector<fs::path> stage_inputs(Stage s, const Config& cfg) {
    const auto& p = cfg.paths;
    switch (s) {
        case Stage::ingest: return {p.corpus, p.gazetteer};
        case Stage::score: {
            std::vector<fs::path> in{p.corpus, p.themes, p.stopwords};
            std::vector<fs::path> produced;
            const fs::path dir = p.output / "ingest";
            if (fs::is_directory(dir))
                for (const auto& e : fs::recursive_directory_iterator(dir))
                    if (e.is_regular_file()) produced.push_back(e.path());
            std::sort(produced.begin(), produced.end());
            in.insert(in.end(), produced.begin(), produced.end());
            return in;
        }
        case Stage::regress:
        case Stage::describe: return {p.firms, p.gazetteer, p.output / "score" / "sbs_scores.csv"};
    }
    return {};
}

StageOutput run_ingest(const Config& cfg, Artifacts& out) {
    StageOutput result;
    const auto loaded = corpus::load_corpus(cfg.paths.corpus, cfg.filter);
    const auto records = gazetteer::load_gazetteer(cfg.paths.gazetteer);
    const gazetteer::GazetteerIndex idx(records);
    for (const auto& id : idx.region_ids()) check_region_id(id);

    if (loaded.articles.empty()) result.warnings.push_back("corpus has no articles after filtering");
    for (const auto& alias : idx.collisions())
        result.warnings.push_back("alias '" + alias + "' names more than one region");

    std::vector<std::vector<gazetteer::RegionMention>> per_article(loaded.articles.size());
    parallel_for(loaded.articles.size(), cfg.threads,
                 [&](std::size_t i) { per_article[i] = gazetteer::tag_regions(loaded.articles[i], idx); });
    std::vector<gazetteer::RegionMention> mentions;
    for (auto& m : per_article) mentions.insert(mentions.end(), m.begin(), m.end());

    std::ostringstream log;
    gazetteer::write_mention_log(log, mentions);
    out.write("mentions.csv", log.str());

    ordered_json regions = ordered_json::object();
    for (const auto& id : idx.region_ids()) {
        const auto sub = gazetteer::build_region_subcorpus(loaded.articles, mentions, id, idx, cfg.ambiguous);
        std::string ids;
        for (const auto& a : sub) ids += a.id + "\n";
        out.write("subcorpus/" + id + ".txt", ids);
        regions[id] = sub.size();
    }

    std::ostringstream rej;
    csv::write_row(rej, {"line", "reason"});
    for (const auto& r : loaded.rejections) csv::write_row(rej, {std::to_string(r.line), r.reason});
    out.write("rejections.csv", rej.str());

    std::size_t ambiguous = 0;
    for (const auto& m : mentions) ambiguous += m.ambiguous;
    ordered_json report;
    report["articles"] = loaded.articles.size();
    report["filtered_out"] = loaded.filtered_out;
    report["rejected"] = loaded.rejections.size();
    report["mentions"] = mentions.size();
    report["ambiguous_mentions"] = ambiguous;
    report["ambiguity_policy"] = cfg.ambiguous == gazetteer::AmbiguityPolicy::drop ? "drop" : "keep";
    report["regions"] = regions;
    report["warnings"] = result.warnings;
    out.write("report.json", report.dump(1) + "\n");
    return result;
}

StageOutput run_score(const Config& cfg, const fs::path& ingest_dir, Artifacts& out) {
    StageOutput result;
    const auto stop = text::load_stopwords(cfg.paths.stopwords);
    const auto themes = relevance::load_themes(cfg.paths.themes, stop);
    const auto loaded = corpus::load_corpus(cfg.paths.corpus, cfg.filter);
    const auto& articles = loaded.articles;
    std::map<std::string, std::size_t> article_index;
    for (std::size_t i = 0; i < articles.size(); ++i) article_index[articles[i].id] = i;

    std::vector<std::vector<corpus::Passage>> passages(articles.size());
    parallel_for(articles.size(), cfg.threads, [&](std::size_t i) {
        passages[i] = corpus::split_passages(articles[i], stop, cfg.max_passage_tokens, cfg.include_title);
    });

    // Flat passage list for the TF-IDF model and relevance flags.
    std::vector<const corpus::Passage*> flat;
    std::vector<std::size_t> first_passage(articles.size() + 1, 0);
    for (std::size_t i = 0; i < articles.size(); ++i) {
        first_passage[i] = flat.size();
        for (const auto& p : passages[i]) flat.push_back(&p);
    }
    first_passage[articles.size()] = flat.size();

    std::vector<std::vector<std::string>> docs;
    for (const auto* p : flat) docs.push_back(p->tokens);
    const bool any_tokens = std::any_of(docs.begin(), docs.end(), [](const auto& d) { return !d.empty(); });
    if (!any_tokens) result.warnings.push_back("no passages with tokens: every theme scores by the absence rule");

    std::vector<std::vector<double>> relevance_scores(themes.size(), std::vector<double>(flat.size(), 0.0));
    if (any_tokens) {
        const auto model = relevance::TfidfModel::build(docs);
        parallel_for(themes.size() * flat.size(), cfg.threads, [&](std::size_t k) {
            const std::size_t t = k / flat.size(), i = k % flat.size();
            relevance_scores[t][i] = relevance::score_passage(themes[t], *flat[i], model).score;
        });
    }
    {
        std::ostringstream rel;
        relevance::write_relevance_header(rel);
        for (std::size_t i = 0; i < flat.size(); ++i) {
            for (std::size_t t = 0; t < themes.size(); ++t) {
                relevance::RelevanceScore s{flat[i]->article_id, flat[i]->index, themes[t].theme_id,
                                            relevance_scores[t][i]};
                relevance::write_relevance_row(rel, s, s.score >= cfg.relevance_threshold);
            }
        }
        out.write("relevance.csv", rel.str());
    }

    std::vector<std::string> regions;
    for (const auto& e : fs::directory_iterator(ingest_dir / "subcorpus"))
        if (e.path().extension() == ".txt") regions.push_back(e.path().stem().string());
    std::sort(regions.begin(), regions.end());
    std::vector<std::vector<std::size_t>> region_articles(regions.size());
    for (std::size_t r = 0; r < regions.size(); ++r) {
        for (const auto& id : read_lines(ingest_dir / "subcorpus" / (regions[r] + ".txt"))) {
            auto it = article_index.find(id);
            if (it == article_index.end())
                throw DataError("subcorpus " + regions[r] + " lists unknown article " + id + "; rerun ingest");
            region_articles[r].push_back(it->second);
        }
    }

    const auto slices = wordnet::enumerate_slices(cfg.granularity, cfg.filter.date_from, cfg.filter.date_to);
    const std::size_t tasks = regions.size() * themes.size() * slices.size();
    std::vector<sbs::SbsScore> scores(tasks);
    std::vector<wordnet::CooccurrenceGraph> graphs(tasks);
    parallel_for(tasks, cfg.threads, [&](std::size_t k) {
        const std::size_t r = k / (themes.size() * slices.size());
        const std::size_t t = (k / slices.size()) % themes.size();
        const auto& slice = slices[k % slices.size()];
        const auto& theme = themes[t];
        std::vector<std::vector<std::string>> relevant;
        for (std::size_t a : region_articles[r]) {
            const Date d = articles[a].published_at;
            if (d < slice.start || slice.end < d) continue;
            for (std::size_t i = first_passage[a]; i < first_passage[a + 1]; ++i)
                if (relevance_scores[t][i] >= cfg.relevance_threshold && !flat[i]->tokens.empty())
                    relevant.push_back(flat[i]->tokens);
        }
        auto g = wordnet::build_graph(std::span<const std::vector<std::string>>(relevant), cfg.window, theme);
        g.meta = {regions[r], theme.theme_id, slice, cfg.window};
        g = wordnet::prune_graph(g, cfg.pruning.min_weight, cfg.pruning.max_nodes, theme.canonical_token);
        scores[k] = sbs::compute_sbs(g, relevant, theme, 1);
        scores[k].region_id = regions[r];
        scores[k].slice = slice;
        scores[k].provenance.relevance_threshold = cfg.relevance_threshold;
        graphs[k] = std::move(g);
    });
    sbs::apply_min_shift(scores);

    std::size_t absent = 0;
    for (const auto& s : scores) absent += !s.provenance.canonical_present;
    if (absent > 0)
        result.warnings.push_back(std::to_string(absent) + " of " + std::to_string(tasks) +
                                  " region/theme/slice graphs lack the theme node and score by the absence rule");

    std::ostringstream sc, prov, tab_csv, tab_txt;
    sbs::write_scores(sc, scores);
    out.write("sbs_scores.csv", sc.str());
    sbs::write_provenance(prov, scores);
    out.write("provenance.json", prov.str());
    if (!scores.empty()) {
        const auto table = sbs::sbs_table(scores);
        stats::write_summary_csv(tab_csv, table);
        stats::write_summary_text(tab_txt, table);
        out.write("sbs_table.csv", tab_csv.str());
        out.write("sbs_table.txt", titled("SBS by theme across regions", tab_txt.str()));
    }
    fs::create_directories(out.path("graphs"));
    for (const auto& g : graphs) {
        const std::string stem = g.meta.region_id + "__" + g.meta.theme_id + "__" + format_date(g.meta.slice.start) +
                                 "_" + format_date(g.meta.slice.end);
        wordnet::write_graph(g, out.path("graphs/" + stem));
    }
    return result;
}

StageOutput run_regress(const Config& cfg, const fs::path& score_dir, Artifacts& out) {
    StageOutput result;
    if (cfg.granularity != wordnet::Granularity::pooled)
        throw ConfigError("regressions join one SBS value per region; set graph.granularity to pooled");
    auto data = load_firm_data(cfg);
    auto& rows = data.derived.rows;
    if (rows.empty()) throw DataError("firm file has no usable rows");
    result.warnings.insert(result.warnings.end(), data.derived.warnings.begin(), data.derived.warnings.end());
    const auto scores = sbs::read_scores(score_dir / "sbs_scores.csv");
    econ::join_sbs(rows, scores);
    out.write("firm_rejections.csv", rejections_csv(data));

    std::vector<econ::RegressionResult> results;
    std::ostringstream missing, first;
    csv::write_row(missing, {"table", "model", "variable", "missing", "rows_in", "rows_used"});
    csv::write_row(first, {"table", "model", "endogenous", "f_stat", "df_num", "df_den", "r2"});
    for (const auto& spec : cfg.models) {
        const auto design = econ::build_design(rows, spec);
        for (const auto& [var, n] : design.missing)
            csv::write_row(missing, {spec.table, spec.name, var, std::to_string(n), std::to_string(design.rows_in),
                                     std::to_string(design.rows_used.size())});
        auto r = econ::fit_2sls(rows, spec);
        if (r.instrument_warnings > 0)
            result.warnings.push_back(spec.table + " " + spec.name + ": " + std::to_string(r.instrument_warnings) +
                                      " instrument values come from singleton sector-region cells");
        for (const auto& f : r.first_stage)
            csv::write_row(first, {spec.table, spec.name, f.endogenous, format_real(f.f_stat),
                                   std::to_string(f.df_num), std::to_string(f.df_den), format_real(f.r2)});
        std::ostringstream coef;
        econ::write_coefficients_csv(coef, r);
        out.write("models/" + slug(spec.table) + "_" + slug(spec.name) + ".csv", coef.str());
        results.push_back(std::move(r));
    }
    out.write("missingness.csv", missing.str());
    out.write("first_stage.csv", first.str());

    std::vector<std::string> tables;
    for (const auto& r : results)
        if (std::find(tables.begin(), tables.end(), r.table) == tables.end()) tables.push_back(r.table);
    for (const auto& t : tables) {
        std::vector<econ::RegressionResult> group;
        for (const auto& r : results)
            if (r.table == t) group.push_back(r);
        const auto rendered = econ::render_regression_table(group, t);
        out.write(slug(t) + ".txt", rendered.text);
        out.write(slug(t) + ".csv", rendered.csv);
    }

    // SBS of foreign-owned vs domestic firms, one row per theme.
    std::ostringstream tt_csv;
    csv::write_row(tt_csv, {"theme", "label", "mean_foreign", "mean_domestic", "n_foreign", "n_domestic", "t", "df",
                            "p", "stars"});
    TextTable tt_txt({"", "Foreign-owned", "Domestic", "Difference", "t", "p"});
    for (const auto& theme : cfg.ttest_themes) {
        std::vector<double> foreign, domestic;
        for (const auto& r : rows) {
            auto it = r.sbs.find(theme);
            if (it == r.sbs.end() || !r.foreign_ownership) continue;
            (*r.foreign_ownership > 0.0 ? foreign : domestic).push_back(it->second);
        }
        const std::string label = sbs::theme_label(theme);
        if (foreign.size() < 2 || domestic.size() < 2) {
            result.warnings.push_back("t-test for " + label + " skipped: " + std::to_string(foreign.size()) +
                                      " foreign-owned and " + std::to_string(domestic.size()) + " domestic firms");
            csv::write_row(tt_csv, {theme, label, "", "", std::to_string(foreign.size()),
                                    std::to_string(domestic.size()), "", "", "", ""});
            tt_txt.add_row({label, "", "", "", "", ""});
            continue;
        }
        const auto t = econ::welch_ttest(foreign, domestic);
        csv::write_row(tt_csv, {theme, label, format_real(t.mean_a), format_real(t.mean_b), std::to_string(t.n_a),
                                std::to_string(t.n_b), format_real(t.t), format_real(t.df), format_real(t.p),
                                stats::stars(t.p)});
        tt_txt.add_row({label, format_fixed(t.mean_a, 3), format_fixed(t.mean_b, 3),
                        format_fixed(t.mean_a - t.mean_b, 3) + stats::stars(t.p), format_fixed(t.t, 3),
                        format_fixed(t.p, 3)});
    }
    out.write("ttests.csv", tt_csv.str());
    std::ostringstream tt_text;
    tt_txt.render(tt_text);
    out.write("ttests.txt", titled("Mean SBS by foreign ownership (Welch t-test)", tt_text.str() +
                                                                                "*** p < 0.01, ** p < 0.05, * p < 0.1\n"));

    if (cfg.montecarlo.enabled) {
        const auto draws =
            econ::iv_monte_carlo(cfg.montecarlo.reps, cfg.montecarlo.n, cfg.seed, cfg.montecarlo.beta, cfg.threads);
        std::ostringstream mc;
        csv::write_row(mc, {"rep", "seed", "ols", "tsls"});
        std::vector<double> iv, ls;
        std::size_t closer = 0;
        for (std::size_t i = 0; i < draws.size(); ++i) {
            csv::write_row(mc, {std::to_string(i), std::to_string(cfg.seed + i), format_real(draws[i].ols),
                                format_real(draws[i].tsls)});
            iv.push_back(draws[i].tsls);
            ls.push_back(draws[i].ols);
            closer += std::abs(draws[i].tsls - cfg.montecarlo.beta) < std::abs(draws[i].ols - cfg.montecarlo.beta);
        }
        out.write("montecarlo.csv", mc.str());
        const auto siv = stats::summarize("tsls", iv);
        const auto sls = stats::summarize("ols", ls);
        const double half = 1.96 * siv.sd;
        ordered_json summary;
        summary["reps"] = cfg.montecarlo.reps;
        summary["n"] = cfg.montecarlo.n;
        summary["beta"] = cfg.montecarlo.beta;
        summary["mean_ols"] = sls.mean;
        summary["mean_tsls"] = siv.mean;
        summary["sd_tsls"] = siv.sd;
        summary["tsls_closer_share"] = static_cast<double>(closer) / static_cast<double>(draws.size());
        summary["beta_in_tsls_95_band"] =
            cfg.montecarlo.beta >= siv.mean - half && cfg.montecarlo.beta <= siv.mean + half;
        out.write("montecarlo_summary.json", summary.dump(1) + "\n");
    }

    ordered_json report;
    report["firms_loaded"] = data.loaded.firms.size();
    report["firms_rejected"] = data.loaded.rejections.size() + data.derived.rejections.size();
    report["rows"] = rows.size();
    if (data.derived.pca) {
        report["pca_loadings"] = data.derived.pca->loadings;
        report["pca_explained"] = data.derived.pca->explained;
    }
    auto models = ordered_json::array();
    for (const auto& r : results)
        models.push_back({{"table", r.table}, {"model", r.model}, {"n_obs", r.n_obs}, {"estimator", r.estimator}});
    report["models"] = models;
    report["warnings"] = result.warnings;
    out.write("report.json", report.dump(1) + "\n");
    return result;
}

StageOutput run_describe(const Config& cfg, const fs::path& score_dir, Artifacts& out) {
    StageOutput result;
    auto data = load_firm_data(cfg);
    if (data.loaded.firms.empty()) throw DataError("firm file has no valid rows");
    auto& rows = data.derived.rows;
    if (rows.empty()) throw DataError("no firm row survives variable construction");
    result.warnings.insert(result.warnings.end(), data.derived.warnings.begin(), data.derived.warnings.end());

    std::vector<std::string> themes;
    if (cfg.granularity == wordnet::Granularity::pooled) {
        const auto scores = sbs::read_scores(score_dir / "sbs_scores.csv");
        econ::join_sbs(rows, scores);
        for (const auto& s : scores)
            if (std::find(themes.begin(), themes.end(), s.theme_id) == themes.end()) themes.push_back(s.theme_id);
    } else {
        result.warnings.push_back("SBS rows omitted: descriptive statistics join pooled scores only");
    }
    std::map<std::string, std::string> names;
    for (const auto& r : data.regions) names[r.region_id] = r.canonical_name;
    const auto d = econ::describe(rows, themes, names);

    std::ostringstream a1c, a1t, a2c, a2t, a3c, a3t;
    stats::write_summary_csv(a1c, d.variables);
    stats::write_summary_text(a1t, d.variables);
    econ::write_country_csv(a2c, d.countries);
    econ::write_country_text(a2t, d.countries);
    econ::write_region_csv(a3c, d.regions);
    econ::write_region_text(a3t, d.regions);
    out.write("table_a1.csv", a1c.str());
    out.write("table_a1.txt", titled("Table A1. Descriptive Statistics", a1t.str()));
    out.write("table_a2.csv", a2c.str());
    out.write("table_a2.txt", titled("Table A2. List of Countries", a2t.str()));
    out.write("table_a3.csv", a3c.str());
    out.write("table_a3.txt", titled("Table A3. List of Regions", a3t.str()));
    return result;
}

}  // namespace newsfdi::pipeline::detail
