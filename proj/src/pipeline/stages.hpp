#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "newsfdi/pipeline.hpp"

namespace newsfdi::pipeline::detail {

// Files a stage writes, relative to its directory.
class Artifacts {
public:
    explicit Artifacts(std::filesystem::path dir) : dir_(std::move(dir)) {}

    void write(const std::string& rel, const std::string& content);
    std::filesystem::path path(const std::string& rel) const { return dir_ / rel; }
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
};

struct StageOutput {
    std::vector<std::string> warnings;
};

nlohmann::ordered_json stage_params(Stage s, const Config& cfg);

// Input files whose hashes decide the cache; `out` is the output root.
std::vector<std::filesystem::path> stage_inputs(Stage s, const Config& cfg);

StageOutput run_ingest(const Config& cfg, Artifacts& out);
StageOutput run_score(const Config& cfg, const std::filesystem::path& ingest_dir, Artifacts& out);
StageOutput run_regress(const Config& cfg, const std::filesystem::path& score_dir, Artifacts& out);
StageOutput run_describe(const Config& cfg, const std::filesystem::path& score_dir, Artifacts& out);

}  // namespace newsfdi::pipeline::detail
