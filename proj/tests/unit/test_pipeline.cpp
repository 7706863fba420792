#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>
#include <sys/wait.h>

#include "newsfdi/csv.hpp"
#include "newsfdi/error.hpp"
#include "newsfdi/pipeline.hpp"
#include "newsfdi/sbs.hpp"
#include "test_support.hpp"

using namespace newsfdi;
using namespace newsfdi::pipeline;
namespace fs = std::filesystem;
using testsupport::read_file;
using testsupport::TempDir;
using testsupport::write_file;

namespace {

fs::path fixtures() { return testsupport::source_dir() / "fixtures"; }

Config fixture_config(const TempDir& tmp) {
    Config cfg = load_config(fixtures() / "config.json");
    cfg.paths.output = tmp / "out";
    cfg.montecarlo.reps = 20;
    return cfg;
}

std::string minimal_config(const std::string& extra = "") {
    return R"({"version": 1, "paths": {"corpus": "c.jsonl", "gazetteer": "g.csv", "themes": "t.json",
               "stopwords": "s.txt", "firms": "f.csv"})" +
           extra + "}";
}

std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), root).generic_string();
        if (rel.starts_with(".manifests/")) continue;
        out[rel] = read_file(e.path());
    }
    return out;
}

std::vector<bool> hits(const std::vector<StageReport>& r) {
    std::vector<bool> out;
    for (const auto& s : r) out.push_back(s.cache_hit);
    return out;
}

std::vector<StageReport> fresh_run(const Config& cfg) { return Runner(cfg).run_all(); }

}  // namespace

TEST_CASE("config defaults and path resolution") {
    const auto cfg = parse_config(minimal_config(), "/data/run");
    CHECK(cfg.paths.corpus == fs::path("/data/run/c.jsonl"));
    CHECK(cfg.paths.output == fs::path("/data/run/out"));
    CHECK(cfg.window == 7);
    CHECK(cfg.relevance_threshold == doctest::Approx(0.15));
    CHECK(cfg.max_passage_tokens == 64);
    CHECK(cfg.pruning.min_weight == 2);
    CHECK(cfg.granularity == wordnet::Granularity::pooled);
    CHECK(cfg.ambiguous == gazetteer::AmbiguityPolicy::drop);
    CHECK(cfg.models.size() == 9);
    CHECK(cfg.ttest_themes.size() == 5);
    CHECK(cfg.seed == 20140101);
}

TEST_CASE("config knobs are read") {
    const auto cfg = parse_config(minimal_config(R"(, "graph": {"window": 3, "min_weight": 1, "granularity": "yearly"},
        "relevance": {"threshold": 0.3}, "regression": {"instruments": "cell_mean", "se": "cluster_region"},
        "gazetteer": {"ambiguous": "keep"}, "threads": 2, "seed": 7)"),
                                  "/x");
    CHECK(cfg.window == 3);
    CHECK(cfg.pruning.min_weight == 1);
    CHECK(cfg.granularity == wordnet::Granularity::yearly);
    CHECK(cfg.relevance_threshold == doctest::Approx(0.3));
    CHECK(cfg.ambiguous == gazetteer::AmbiguityPolicy::keep);
    CHECK(cfg.threads == 2);
    CHECK(cfg.seed == 7);
    for (const auto& m : cfg.models) {
        CHECK(m.instruments == econ::InstrumentVariant::cell_mean);
        CHECK(m.se == econ::SeType::cluster_region);
    }
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_config("{", "/"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"version": 2})", "/"), ConfigError);
    CHECK_THROWS_AS(parse_config(minimal_config(R"(, "windw": 3)"), "/"), ConfigError);
    CHECK_THROWS_AS(parse_config(minimal_config(R"(, "graph": {"window": 1})"), "/"), ConfigError);
    CHECK_THROWS_AS(parse_config(minimal_config(R"(, "relevance": {"threshold": 1.5})"), "/"), ConfigError);
    CHECK_THROWS_AS(parse_config(minimal_config(R"(, "gazetteer": {"ambiguous": "maybe"})"), "/"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"version": 1, "paths": {"corpus": "c"}})", "/"), ConfigError);
    CHECK_THROWS_AS(parse_config(minimal_config(R"(, "regression": {"ttest_themes": ["weather"]})"), "/"), ConfigError);
}

TEST_CASE("a model naming an unknown theme fails before estimation") {
    const std::string bad = R"(, "regression": {"models": [{"obstacles": ["corruption"], "sbs_theme": "weather",
                                "interact": "corruption"}]})";
    CHECK_THROWS_AS(parse_config(minimal_config(bad), "/"), ConfigError);
    const std::string dup = R"(, "regression": {"models": [{"obstacles": ["corruption"]}, {"obstacles": ["crime_disorder"], "name": "Model 1"}]})";
    CHECK_THROWS_AS(parse_config(minimal_config(dup), "/"), ConfigError);
}

TEST_CASE("validate requires existing input files") {
    TempDir tmp;
    auto cfg = parse_config(minimal_config(), tmp.path());
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    for (const char* f : {"c.jsonl", "g.csv", "t.json", "s.txt", "f.csv"}) write_file(tmp / f, "");
    CHECK_NOTHROW(validate(cfg));
}

TEST_CASE("bundled roster file equals the built-in default") {
    const auto file = parse_roster(read_file(testsupport::source_dir() / "data" / "roster_default.json"));
    const auto def = default_roster();
    REQUIRE(file.size() == def.size());
    for (std::size_t i = 0; i < def.size(); ++i) {
        CHECK(file[i].table == def[i].table);
        CHECK(file[i].name == def[i].name);
        CHECK(file[i].obstacles == def[i].obstacles);
        CHECK(file[i].sbs_theme == def[i].sbs_theme);
        CHECK(file[i].interact == def[i].interact);
        CHECK(file[i].controls == def[i].controls);
        CHECK(file[i].country_fe == def[i].country_fe);
        CHECK(file[i].sector_fe == def[i].sector_fe);
    }
    std::size_t t2 = 0, t3 = 0;
    for (const auto& m : def) (m.table == "Table 2" ? t2 : t3)++;
    CHECK(t2 == 5);
    CHECK(t3 == 4);
    CHECK(default_ttest_themes() == std::vector<std::string>{"land", "labor", "trade", "taxation", "justice"});
}

TEST_CASE("sha256 known vectors") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("fixture ingest writes one subcorpus index per region") {
    TempDir tmp;
    Runner runner(fixture_config(tmp));
    const auto r = runner.run(Stage::ingest);
    CHECK_FALSE(r.cache_hit);
    CHECK(r.warnings.empty());
    const auto dir = runner.stage_dir(Stage::ingest) / "subcorpus";
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(dir)) n += e.path().extension() == ".txt";
    CHECK(n == 3);
    CHECK(read_file(dir / "fes_meknes.txt") == "a01\na02\na03\na04\n");
    // a12 mentions Casablanca alongside Lagos.
    CHECK(read_file(dir / "casablanca_settat.txt") == "a05\na06\na07\na08\na12\n");
    CHECK(fs::exists(runner.manifest_path(Stage::ingest)));

    const auto again = Runner(fixture_config(tmp)).run(Stage::ingest);
    CHECK(again.cache_hit);
}

TEST_CASE("fixture score emits one row per region and theme") {
    TempDir tmp;
    Runner runner(fixture_config(tmp));
    const auto r = runner.run(Stage::score);
    const auto scores = sbs::read_scores(runner.stage_dir(Stage::score) / "sbs_scores.csv");
    CHECK(scores.size() == 15);
    // Casablanca articles carry no labor sentence: absence rule row.
    bool found = false;
    for (const auto& s : scores) {
        if (s.region_id == "casablanca_settat" && s.theme_id == "labor") {
            found = true;
            CHECK(s.prevalence == 0);
            CHECK(s.diversity == 0.0);
            CHECK(s.connectivity == 0.0);
            CHECK_FALSE(s.provenance.canonical_present);
        }
    }
    CHECK(found);
    REQUIRE(r.warnings.size() == 1);
    CHECK(r.warnings[0].find("1 of 15") != std::string::npos);
    CHECK(fs::exists(runner.stage_dir(Stage::score) / "graphs" / "lagos__land__2014-01-01_2019-12-31.csv"));
}

TEST_CASE("cache hits and stage isolation") {
    TempDir tmp;
    const auto cfg = fixture_config(tmp);
    CHECK(hits(fresh_run(cfg)) == std::vector<bool>{false, false, false, false});
    const auto before = tree(cfg.paths.output);
    CHECK(hits(fresh_run(cfg)) == std::vector<bool>{true, true, true, true});

    Runner probe(cfg);
    SUBCASE("deleting one stage's outputs recomputes it and everything after") {
        fs::remove_all(probe.stage_dir(Stage::score));
        CHECK(hits(fresh_run(cfg)) == std::vector<bool>{true, false, false, false});
        CHECK(tree(cfg.paths.output) == before);
    }
    SUBCASE("a tampered output invalidates its stage") {
        write_file(probe.stage_dir(Stage::describe) / "table_a2.csv", "x\n");
        CHECK(hits(fresh_run(cfg)) == std::vector<bool>{true, true, true, false});
        CHECK(tree(cfg.paths.output) == before);
    }
    SUBCASE("an extra file in a stage directory invalidates it") {
        write_file(probe.stage_dir(Stage::regress) / "stray.txt", "x");
        CHECK(hits(fresh_run(cfg)) == std::vector<bool>{true, true, false, true});
        CHECK_FALSE(fs::exists(probe.stage_dir(Stage::regress) / "stray.txt"));
    }
    SUBCASE("a parameter change reruns from the stage that reads it") {
        auto changed = cfg;
        changed.window = 5;
        CHECK(hits(fresh_run(changed)) == std::vector<bool>{true, false, false, false});
    }
    SUBCASE("a regression knob leaves ingest and score cached") {
        auto changed = cfg;
        changed.seed = 99;
        CHECK(hits(fresh_run(changed)) == std::vector<bool>{true, true, false, true});
    }
    SUBCASE("thread count is not a parameter") {
        auto changed = cfg;
        changed.threads = 3;
        CHECK(hits(fresh_run(changed)) == std::vector<bool>{true, true, true, true});
    }
    SUBCASE("an edited input file reruns its readers") {
        TempDir copy;
        fs::copy_file(cfg.paths.firms, copy / "firms.csv");
        auto changed = cfg;
        changed.paths.firms = copy / "firms.csv";
        const std::string text = read_file(changed.paths.firms);
        const auto last = text.substr(text.rfind('\n', text.size() - 2) + 1);
        write_file(changed.paths.firms, text + "F9999" + last.substr(last.find(',')));
        CHECK(hits(fresh_run(changed)) == std::vector<bool>{true, true, false, false});
    }
}

TEST_CASE("thread count does not change any artifact") {
    TempDir a, b;
    auto ca = fixture_config(a);
    auto cb = fixture_config(b);
    ca.threads = 1;
    cb.threads = 4;
    fresh_run(ca);
    fresh_run(cb);
    CHECK(tree(ca.paths.output) == tree(cb.paths.output));
}

TEST_CASE("default roster yields nine columns and five t-test rows") {
    TempDir tmp;
    Runner runner(fixture_config(tmp));
    runner.run(Stage::regress);
    const auto dir = runner.stage_dir(Stage::regress);
    const auto t2 = csv::read_file(dir / "table_2.csv");
    const auto t3 = csv::read_file(dir / "table_3.csv");
    CHECK(t2.header.size() - 1 + t3.header.size() - 1 == 9);
    const auto tt = csv::read_file(dir / "ttests.csv");
    REQUIRE(tt.rows.size() == 5);
    for (const auto& row : tt.rows) CHECK_FALSE(row[6].empty());
    std::size_t models = 0;
    for (const auto& e : fs::directory_iterator(dir / "models")) models += e.is_regular_file();
    CHECK(models == 9);
    const auto text = read_file(dir / "table_2.txt");
    CHECK(text.find("Dependent Variable: Percentage of Foreign Ownership") != std::string::npos);
    CHECK(text.find("Country FE") != std::string::npos);
}

TEST_CASE("descriptive tables match a tally of the firm file") {
    TempDir tmp;
    Runner runner(fixture_config(tmp));
    runner.run(Stage::describe);
    const auto dir = runner.stage_dir(Stage::describe);

    // The generator plants two invalid rows (F9001, F9002); every other row is valid.
    const auto firms = csv::read_file(fixtures() / "firms.csv");
    std::map<std::string, std::pair<std::size_t, double>> country;
    std::map<std::string, std::size_t> region;
    std::vector<double> fo;
    for (const auto& row : firms.rows) {
        if (row[0].starts_with("F9")) continue;
        const double v = std::stod(row[7]);
        country[row[1]].first++;
        country[row[1]].second += v;
        region[row[2]]++;
        fo.push_back(v);
    }
    const auto a2 = csv::read_file(dir / "table_a2.csv");
    CHECK(a2.header == std::vector<std::string>{"Country", "Total no. of firms", "FDI ownership (average)"});
    REQUIRE(a2.rows.size() == country.size());
    for (const auto& row : a2.rows) {
        const auto& [n, sum] = country.at(row[0]);
        CHECK(std::stoul(row[1]) == n);
        CHECK(std::abs(std::stod(row[2]) - sum / n) < 5e-4);
    }
    const auto a3 = csv::read_file(dir / "table_a3.csv");
    CHECK(a3.header == std::vector<std::string>{"Country", "Region ID", "Region", "Total no. of Firms"});
    REQUIRE(a3.rows.size() == region.size());
    for (const auto& row : a3.rows) CHECK(std::stoul(row[3]) == region.at(row[1]));

    double mean = 0, ss = 0;
    for (double v : fo) mean += v;
    mean /= fo.size();
    for (double v : fo) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (fo.size() - 1));
    const auto a1 = csv::read_file(dir / "table_a1.csv");
    CHECK(a1.header == std::vector<std::string>{"Variable", "Obs", "Mean", "Std. Dev.", "Min", "Max"});
    REQUIRE(!a1.rows.empty());
    CHECK(a1.rows[0][0] == "Foreign ownership");
    CHECK(std::stoul(a1.rows[0][1]) == fo.size());
    CHECK(std::abs(std::stod(a1.rows[0][2]) - mean) < 5e-4);
    CHECK(std::abs(std::stod(a1.rows[0][3]) - sd) < 5e-4);
    for (const char* f : {"table_a1.txt", "table_a2.txt", "table_a3.txt"}) CHECK(fs::exists(dir / f));
}

TEST_CASE("describe on one valid firm row and on an empty firm file") {
    TempDir tmp;
    auto cfg = fixture_config(tmp);
    const auto firms = read_file(cfg.paths.firms);
    const auto header = firms.substr(0, firms.find('\n') + 1);
    const auto first = firms.substr(header.size(), firms.find('\n', header.size()) + 1 - header.size());

    SUBCASE("one row") {
        write_file(tmp / "one.csv", header + first);
        cfg.paths.firms = tmp / "one.csv";
        const auto r = Runner(cfg).run(Stage::describe);
        CHECK_FALSE(r.warnings.empty());
        for (const char* f : {"table_a1.csv", "table_a2.csv", "table_a3.csv"})
            CHECK(fs::exists(Runner(cfg).stage_dir(Stage::describe) / f));
    }
    SUBCASE("empty") {
        write_file(tmp / "empty.csv", header);
        cfg.paths.firms = tmp / "empty.csv";
        Runner runner(cfg);
        CHECK_THROWS_AS(runner.run(Stage::describe), DataError);
        CHECK_FALSE(fs::exists(runner.manifest_path(Stage::describe)));
    }
}

TEST_CASE("an empty corpus ingests with a warning") {
    TempDir tmp;
    auto cfg = fixture_config(tmp);
    write_file(tmp / "empty.jsonl", "");
    cfg.paths.corpus = tmp / "empty.jsonl";
    Runner runner(cfg);
    const auto r = runner.run(Stage::ingest);
    REQUIRE(r.warnings.size() == 1);
    CHECK(r.warnings[0].find("no articles") != std::string::npos);
    CHECK(read_file(runner.stage_dir(Stage::ingest) / "subcorpus" / "lagos.txt").empty());
    const auto s = runner.run(Stage::score);
    CHECK(sbs::read_scores(runner.stage_dir(Stage::score) / "sbs_scores.csv").size() == 15);
}

TEST_CASE("an alias shared by two regions is dropped or kept by policy") {
    TempDir tmp;
    auto cfg = fixture_config(tmp);
    write_file(tmp / "g.csv",
               "region_id,country,canonical_name,alias\n"
               "niger_state,Nigeria,Niger,Niger\nniger_state,Nigeria,Niger,Minna\n"
               "niger_country,Niger,Niger,Niger\nniger_country,Niger,Niger,Niamey\n");
    write_file(tmp / "c.jsonl",
               R"({"id":"n1","source":"s","published_at":"2016-03-01","title":"Niger budget","body":"Tax revenue rose.","language":"eng","top_traffic":true})"
               "\n"
               R"({"id":"n2","source":"s","published_at":"2016-03-02","title":"Minna traders","body":"Customs delays grew.","language":"eng","top_traffic":true})"
               "\n");
    cfg.paths.gazetteer = tmp / "g.csv";
    cfg.paths.corpus = tmp / "c.jsonl";

    Runner drop(cfg);
    const auto r = drop.run(Stage::ingest);
    CHECK(r.warnings.size() == 1);
    const auto sub = drop.stage_dir(Stage::ingest) / "subcorpus";
    CHECK(read_file(sub / "niger_state.txt") == "n2\n");
    CHECK(read_file(sub / "niger_country.txt").empty());
    CHECK(read_file(drop.stage_dir(Stage::ingest) / "mentions.csv").find("n1,niger_country") != std::string::npos);

    cfg.ambiguous = gazetteer::AmbiguityPolicy::keep;
    Runner keep(cfg);
    CHECK_FALSE(keep.run(Stage::ingest).cache_hit);
    CHECK(read_file(sub / "niger_state.txt") == "n1\nn2\n");
    CHECK(read_file(sub / "niger_country.txt") == "n1\n");
}

TEST_CASE("regress refuses sliced scores") {
    TempDir tmp;
    auto cfg = fixture_config(tmp);
    cfg.granularity = wordnet::Granularity::yearly;
    Runner runner(cfg);
    CHECK_THROWS_AS(runner.run(Stage::regress), ConfigError);
    CHECK(sbs::read_scores(runner.stage_dir(Stage::score) / "sbs_scores.csv").size() == 3 * 5 * 6);
}

TEST_CASE("cli exit codes") {
    TempDir tmp;
    const std::string cli = NEWSFDI_CLI;
    auto run = [&](const std::string& args) {
        const int status = std::system((cli + " " + args + " 2>" + (tmp / "err.txt").string()).c_str());
        return WEXITSTATUS(status);
    };
    auto text = read_file(fixtures() / "config.json");
    const auto pos = text.find("\"output\": \"out\"");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 15, "\"output\": \"" + (tmp / "out").generic_string() + "\"");
    text.replace(text.find("\"reps\": 200"), 11, "\"reps\": 10");
    // Relative input paths resolve against the config's directory.
    std::string cfg_text = text;
    for (const char* f : {"corpus.jsonl", "gazetteer.csv", "firms.csv"})
        cfg_text.replace(cfg_text.find(std::string("\"") + f + "\""), std::string(f).size() + 2,
                         "\"" + (fixtures() / f).generic_string() + "\"");
    for (const char* f : {"../data/themes.json", "../data/stopwords_en.txt"})
        cfg_text.replace(cfg_text.find(std::string("\"") + f + "\""), std::string(f).size() + 2,
                         "\"" + (fixtures() / f).lexically_normal().generic_string() + "\"");
    write_file(tmp / "config.json", cfg_text);
    const std::string config = "--config " + (tmp / "config.json").string();

    CHECK(run("--help >/dev/null") == 0);
    CHECK(run("") == 2);
    CHECK(run("frobnicate " + config) == 2);
    CHECK(run("all --config " + (tmp / "missing.json").string()) == 2);
    CHECK(run("ingest " + config + " --ambiguous maybe") == 2);
    CHECK(run("all " + config + " --threads 2") == 0);
    CHECK(fs::exists(tmp / "out" / "describe" / "table_a3.txt"));
    CHECK(run("regress " + config + " --seed 11") == 0);
    CHECK(read_file(tmp / "out" / "regress" / "montecarlo.csv").find("\n0,11,") != std::string::npos);

    write_file(tmp / "firms_bad.csv", "firm_id,country\nx,y\n");
    auto bad = cfg_text;
    const auto firms = (fixtures() / "firms.csv").generic_string();
    bad.replace(bad.find(firms), firms.size(), (tmp / "firms_bad.csv").generic_string());
    write_file(tmp / "bad.json", bad);
    CHECK(run("describe --config " + (tmp / "bad.json").string()) == 3);
    CHECK(read_file(tmp / "err.txt").find("describe: ") != std::string::npos);
}
