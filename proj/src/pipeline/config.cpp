#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "newsfdi/error.hpp"
#include "newsfdi/pipeline.hpp"
#include "newsfdi/relevance.hpp"

namespace newsfdi::pipeline {
namespace {

using json = nlohmann::json;

// Reads keys of one JSON object and rejects any it was not asked about.
class Section {
public:
    Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
    }

    const json* get(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    template <class T>
    void read(const std::string& key, T& out) {
        if (const json* v = get(key)) {
            try {
                out = v->get<T>();
            } catch (const json::exception&) {
                throw ConfigError(where_ + "." + key + ": wrong type");
            }
        }
    }

    void read_count(const std::string& key, std::size_t& out) {
        if (const json* v = get(key)) {
            if (!v->is_number_unsigned()) throw ConfigError(where_ + "." + key + ": expected a nonnegative integer");
            out = v->get<std::size_t>();
        }
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.contains(it.key())) throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
    }

    const std::string& where() const { return where_; }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

json parse_json(std::string_view text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(what + ": invalid JSON: " + e.what());
    }
}

Date read_date(Section& s, const std::string& key, Date fallback) {
    std::string text;
    s.read(key, text);
    if (text.empty()) return fallback;
    auto d = parse_date(text);
    if (!d) throw ConfigError(s.where() + "." + key + ": invalid date '" + text + "'");
    return *d;
}

econ::RegressionSpec parse_model(const json& j, std::size_t index, econ::InstrumentVariant instruments,
                                 econ::SeType se) {
    Section s(j, "models[" + std::to_string(index) + "]");
    econ::RegressionSpec spec;
    spec.instruments = instruments;
    spec.se = se;
    s.read("name", spec.name);
    s.read("table", spec.table);
    s.read("dependent", spec.dependent);
    s.read("obstacles", spec.obstacles);
    std::string theme, interact;
    s.read("sbs_theme", theme);
    s.read("interact", interact);
    if (!theme.empty()) spec.sbs_theme = theme;
    if (!interact.empty()) spec.interact = interact;
    s.read("controls", spec.controls);
    s.read("country_fe", spec.country_fe);
    s.read("sector_fe", spec.sector_fe);
    std::string text;
    s.read("instruments", text);
    if (!text.empty()) {
        auto v = econ::parse_instrument_variant(text);
        if (!v) throw ConfigError(s.where() + ".instruments: expected leave_out or cell_mean");
        spec.instruments = *v;
    }
    text.clear();
    s.read("se", text);
    if (!text.empty()) {
        auto v = econ::parse_se_type(text);
        if (!v) throw ConfigError(s.where() + ".se: expected hc1 or cluster_region");
        spec.se = *v;
    }
    s.finish();
    if (spec.name.empty()) spec.name = "Model " + std::to_string(index + 1);
    if (spec.table.empty()) spec.table = "Models";
    econ::validate_spec(spec);
    return spec;
}

std::vector<econ::RegressionSpec> parse_models(const json& j, econ::InstrumentVariant instruments, econ::SeType se) {
    if (!j.is_array() || j.empty()) throw ConfigError("models: expected a nonempty array");
    std::vector<econ::RegressionSpec> out;
    std::set<std::pair<std::string, std::string>> names;
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(parse_model(j[i], i, instruments, se));
        if (!names.insert({out.back().table, out.back().name}).second)
            throw ConfigError("models: duplicate model '" + out.back().name + "' in " + out.back().table);
    }
    return out;
}

econ::RegressionSpec model(std::string table, std::string name, std::vector<std::string> obstacles,
                           std::optional<std::string> theme = {}, std::optional<std::string> interact = {}) {
    econ::RegressionSpec s;
    s.table = std::move(table);
    s.name = std::move(name);
    s.obstacles = std::move(obstacles);
    s.sbs_theme = std::move(theme);
    s.interact = std::move(interact);
    return s;
}

}  // namespace

std::vector<econ::RegressionSpec> default_roster() {
    const std::vector<std::string> cc{"corruption", "crime_disorder"};
    return {
        model("Table 2", "Model 1", cc),
        model("Table 2", "Model 2", cc, "justice", "corruption"),
        model("Table 2", "Model 3", cc, "justice", "crime_disorder"),
        model("Table 2", "Model 4", cc, "taxation", "crime_disorder"),
        model("Table 2", "Model 5", cc, "taxation", "corruption"),
        model("Table 3", "Model 1", {"business_license"}, "justice", "business_license"),
        model("Table 3", "Model 2", {"business_license"}, "trade", "business_license"),
        model("Table 3", "Model 3", {"labor_regulation"}, "labor", "labor_regulation"),
        model("Table 3", "Model 4", {"access_to_land"}, "land", "access_to_land"),
    };
}

std::vector<std::string> default_ttest_themes() { return {"land", "labor", "trade", "taxation", "justice"}; }

std::vector<econ::RegressionSpec> parse_roster(std::string_view json_text, econ::InstrumentVariant instruments,
                                               econ::SeType se) {
    const json j = parse_json(json_text, "roster");
    Section s(j, "roster");
    const json* models = s.get("models");
    s.finish();
    if (!models) throw ConfigError("roster: missing 'models'");
    return parse_models(*models, instruments, se);
}

Config parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
    const json j = parse_json(json_text, "config");
    Section root(j, "config");
    Config cfg;

    int version = 0;
    root.read("version", version);
    if (version != kConfigVersion)
        throw ConfigError("config: version must be " + std::to_string(kConfigVersion) + " (got " +
                          std::to_string(version) + ")");

    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() ? path : (base_dir / path).lexically_normal();
    };

    if (const json* v = root.get("paths")) {
        Section s(*v, "paths");
        std::string corpus, gaz, themes, stop, firms, output = "out";
        s.read("corpus", corpus);
        s.read("gazetteer", gaz);
        s.read("themes", themes);
        s.read("stopwords", stop);
        s.read("firms", firms);
        s.read("output", output);
        s.finish();
        for (const auto& [name, value] : {std::pair{"corpus", &corpus}, {"gazetteer", &gaz}, {"themes", &themes},
                                          {"stopwords", &stop}, {"firms", &firms}, {"output", &output}})
            if (value->empty()) throw ConfigError(std::string("paths.") + name + " is required");
        cfg.paths = {resolve(corpus), resolve(gaz), resolve(themes), resolve(stop), resolve(firms), resolve(output)};
    } else {
        throw ConfigError("config: missing 'paths'");
    }

    if (const json* v = root.get("corpus")) {
        Section s(*v, "corpus");
        cfg.filter.date_from = read_date(s, "date_from", cfg.filter.date_from);
        cfg.filter.date_to = read_date(s, "date_to", cfg.filter.date_to);
        s.read("require_top_traffic", cfg.filter.require_top_traffic);
        s.read("language", cfg.filter.language);
        s.read("include_title", cfg.include_title);
        s.finish();
        if (cfg.filter.date_to < cfg.filter.date_from) throw ConfigError("corpus: date_to precedes date_from");
    }
    if (const json* v = root.get("tokenizer")) {
        Section s(*v, "tokenizer");
        s.read_count("max_passage_tokens", cfg.max_passage_tokens);
        s.finish();
    }
    if (cfg.max_passage_tokens < 16) throw ConfigError("tokenizer.max_passage_tokens must be at least 16");
    if (const json* v = root.get("gazetteer")) {
        Section s(*v, "gazetteer");
        std::string policy = "drop";
        s.read("ambiguous", policy);
        s.finish();
        if (policy == "drop")
            cfg.ambiguous = gazetteer::AmbiguityPolicy::drop;
        else if (policy == "keep")
            cfg.ambiguous = gazetteer::AmbiguityPolicy::keep;
        else
            throw ConfigError("gazetteer.ambiguous: expected drop or keep");
    }
    if (const json* v = root.get("relevance")) {
        Section s(*v, "relevance");
        s.read("threshold", cfg.relevance_threshold);
        s.finish();
    }
    if (!(cfg.relevance_threshold >= 0.0 && cfg.relevance_threshold <= 1.0))
        throw ConfigError("relevance.threshold must lie in [0, 1]");
    if (const json* v = root.get("graph")) {
        Section s(*v, "graph");
        s.read_count("window", cfg.window);
        std::size_t min_weight = cfg.pruning.min_weight;
        s.read_count("min_weight", min_weight);
        cfg.pruning.min_weight = min_weight;
        s.read_count("max_nodes", cfg.pruning.max_nodes);
        std::string gran = "pooled";
        s.read("granularity", gran);
        s.finish();
        auto g = wordnet::parse_granularity(gran);
        if (!g) throw ConfigError("graph.granularity: expected pooled, yearly, quarterly, monthly or daily");
        cfg.granularity = *g;
    }
    if (cfg.window < 2) throw ConfigError("graph.window must be at least 2");
    if (cfg.pruning.min_weight < 1) throw ConfigError("graph.min_weight must be at least 1");
    if (cfg.pruning.max_nodes < 1) throw ConfigError("graph.max_nodes must be at least 1");

    auto instruments = econ::InstrumentVariant::leave_out;
    auto se = econ::SeType::hc1;
    cfg.ttest_themes = default_ttest_themes();
    const json* models = nullptr;
    if (const json* v = root.get("regression")) {
        Section s(*v, "regression");
        std::string text = "leave_out";
        s.read("instruments", text);
        auto iv = econ::parse_instrument_variant(text);
        if (!iv) throw ConfigError("regression.instruments: expected leave_out or cell_mean");
        instruments = *iv;
        text = "hc1";
        s.read("se", text);
        auto st = econ::parse_se_type(text);
        if (!st) throw ConfigError("regression.se: expected hc1 or cluster_region");
        se = *st;
        models = s.get("models");
        s.read("ttest_themes", cfg.ttest_themes);
        s.finish();
    }
    if (!models || (models->is_string() && models->get<std::string>() == "default")) {
        cfg.models = default_roster();
        for (auto& m : cfg.models) {
            m.instruments = instruments;
            m.se = se;
        }
    } else {
        cfg.models = parse_models(*models, instruments, se);
    }
    for (const auto& t : cfg.ttest_themes)
        if (!relevance::is_theme_id(t)) throw ConfigError("regression.ttest_themes: unknown theme " + t);

    if (const json* v = root.get("montecarlo")) {
        Section s(*v, "montecarlo");
        s.read("enabled", cfg.montecarlo.enabled);
        s.read_count("reps", cfg.montecarlo.reps);
        s.read_count("n", cfg.montecarlo.n);
        s.read("beta", cfg.montecarlo.beta);
        s.finish();
        if (cfg.montecarlo.enabled && (cfg.montecarlo.reps < 1 || cfg.montecarlo.n < 10))
            throw ConfigError("montecarlo: reps must be >= 1 and n >= 10");
    }
    if (const json* v = root.get("seed")) {
        if (!v->is_number_unsigned()) throw ConfigError("seed: expected a nonnegative integer");
        cfg.seed = v->get<std::uint64_t>();
    }
    if (const json* v = root.get("threads")) {
        if (!v->is_number_unsigned()) throw ConfigError("threads: expected a nonnegative integer");
        cfg.threads = v->get<unsigned>();
    }
    root.finish();
    return cfg;
}

Config load_config(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file: " + file.string());
    std::ostringstream text;
    text << in.rdbuf();
    Config cfg = parse_config(text.str(), file.parent_path());
    cfg.file = file;
    validate(cfg);
    return cfg;
}

void validate(const Config& cfg) {
    for (const auto& [name, path] : {std::pair{"corpus", &cfg.paths.corpus}, {"gazetteer", &cfg.paths.gazetteer},
                                     {"themes", &cfg.paths.themes}, {"stopwords", &cfg.paths.stopwords},
                                     {"firms", &cfg.paths.firms}}) {
        if (!std::filesystem::is_regular_file(*path))
            throw ConfigError(std::string("paths.") + name + ": no such file: " + path->string());
    }
}

}  // namespace newsfdi::pipeline
