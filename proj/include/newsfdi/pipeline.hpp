#pragma once

// Stage orchestration: config file, cached stages with manifests, and the
// artifacts each stage writes under the output directory.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "newsfdi/corpus.hpp"
#include "newsfdi/econ.hpp"
#include "newsfdi/gazetteer.hpp"
#include "newsfdi/wordnet.hpp"

namespace newsfdi::pipeline {

inline constexpr int kConfigVersion = 1;

struct Paths {
    std::filesystem::path corpus;
    std::filesystem::path gazetteer;
    std::filesystem::path themes;
    std::filesystem::path stopwords;
    std::filesystem::path firms;
    std::filesystem::path output;
};

struct MonteCarloConfig {
    bool enabled = true;
    std::size_t reps = 200;
    std::size_t n = 500;
    double beta = 2.0;
};

struct Config {
    std::filesystem::path file;  // empty when parsed from text
    Paths paths;
    corpus::CorpusFilter filter;
    bool include_title = true;
    std::size_t max_passage_tokens = 64;
    gazetteer::AmbiguityPolicy ambiguous = gazetteer::AmbiguityPolicy::drop;
    double relevance_threshold = 0.15;
    std::size_t window = 7;
    wordnet::PruneParams pruning;
    wordnet::Granularity granularity = wordnet::Granularity::pooled;
    std::vector<econ::RegressionSpec> models;
    std::vector<std::string> ttest_themes;
    MonteCarloConfig montecarlo;
    std::uint64_t seed = 20140101;
    unsigned threads = 0;  // 0 = all hardware threads
};

// Default models: "Table 2" holds five corruption/crime models, "Table 3"
// four single-obstacle models, each interacted with one theme.
std::vector<econ::RegressionSpec> default_roster();
std::vector<std::string> default_ttest_themes();

// Model list in the config's "models" format. Throws ConfigError.
std::vector<econ::RegressionSpec> parse_roster(std::string_view json_text,
                                               econ::InstrumentVariant instruments = econ::InstrumentVariant::leave_out,
                                               econ::SeType se = econ::SeType::hc1);

// Relative paths resolve against `base_dir`. Throws ConfigError on unknown
// keys, bad values or a version mismatch; does not touch the filesystem.
Config parse_config(std::string_view json_text, const std::filesystem::path& base_dir);

// parse_config + validate.
Config load_config(const std::filesystem::path& file);

// Every input path must exist. Throws ConfigError.
void validate(const Config& cfg);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

enum class Stage { ingest, score, regress, describe };
std::string_view stage_name(Stage s);

struct StageReport {
    Stage stage = Stage::ingest;
    bool cache_hit = false;
    std::vector<std::string> warnings;
};

// Runs stages with their prerequisites. A stage is skipped when its manifest
// records the same parameters and input hashes, all recorded outputs are
// present and unchanged, and nothing upstream was recomputed in this run.
class Runner {
public:
    explicit Runner(Config cfg, std::ostream* log = nullptr);

    StageReport run(Stage s);
    std::vector<StageReport> run_all();

    const Config& config() const { return cfg_; }
    std::filesystem::path stage_dir(Stage s) const;
    std::filesystem::path manifest_path(Stage s) const;

private:
    Config cfg_;
    std::ostream* log_;
    std::vector<std::optional<StageReport>> done_;
    std::vector<bool> recomputed_;
};

}  // namespace newsfdi::pipeline
