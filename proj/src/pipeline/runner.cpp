#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "newsfdi/error.hpp"
#include "stages.hpp"

namespace newsfdi::pipeline {
namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error(ErrorKind::internal, "SHA-256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return sha256_hex(buf.str());
}

std::string_view stage_name(Stage s) {
    switch (s) {
        case Stage::ingest: return "ingest";
        case Stage::score: return "score";
        case Stage::regress: return "regress";
        case Stage::describe: return "describe";
    }
    return "?";
}

namespace detail {

void Artifacts::write(const std::string& rel, const std::string& content) {
    const fs::path p = dir_ / rel;
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw DataError("cannot write " + p.string());
    out << content;
    if (!out) throw DataError("write failed: " + p.string());
}

}  // namespace detail

namespace {

std::vector<Stage> prerequisites(Stage s) {
    switch (s) {
        case Stage::ingest: return {};
        case Stage::score: return {Stage::ingest};
        case Stage::regress:
        case Stage::describe: return {Stage::score};
    }
    return {};
}

std::string now_utc() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::vector<std::string> list_files(const fs::path& dir) {
    std::vector<std::string> out;
    if (!fs::is_directory(dir)) return out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) out.push_back(fs::relative(e.path(), dir).generic_string());
    std::sort(out.begin(), out.end());
    return out;
}

ordered_json hash_inputs(const std::vector<fs::path>& inputs) {
    ordered_json j = ordered_json::object();
    for (const auto& p : inputs) j[p.generic_string()] = sha256_file(p);
    return j;
}

std::optional<ordered_json> read_manifest(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    try {
        return ordered_json::parse(in);
    } catch (const ordered_json::exception&) {
        return std::nullopt;
    }
}

bool outputs_intact(const ordered_json& recorded, const fs::path& dir) {
    if (!recorded.is_object()) return false;
    if (list_files(dir).size() != recorded.size()) return false;
    for (auto it = recorded.begin(); it != recorded.end(); ++it) {
        const fs::path p = dir / it.key();
        if (!fs::is_regular_file(p) || sha256_file(p) != it.value().get<std::string>()) return false;
    }
    return true;
}

}  // namespace

Runner::Runner(Config cfg, std::ostream* log)
    : cfg_(std::move(cfg)), log_(log), done_(4), recomputed_(4, false) {}

fs::path Runner::stage_dir(Stage s) const { return cfg_.paths.output / std::string(stage_name(s)); }

fs::path Runner::manifest_path(Stage s) const {
    return cfg_.paths.output / ".manifests" / (std::string(stage_name(s)) + ".json");
}

StageReport Runner::run(Stage s) {
    const auto slot = static_cast<std::size_t>(s);
    if (done_[slot]) return *done_[slot];

    bool upstream_changed = false;
    for (Stage p : prerequisites(s)) {
        run(p);
        upstream_changed = upstream_changed || recomputed_[static_cast<std::size_t>(p)];
    }

    const std::string name(stage_name(s));
    const ordered_json params = detail::stage_params(s, cfg_);
    const ordered_json inputs = hash_inputs(detail::stage_inputs(s, cfg_));
    const fs::path dir = stage_dir(s);

    StageReport report;
    report.stage = s;
    if (!upstream_changed) {
        if (auto m = read_manifest(manifest_path(s));
            m && m->value("params", ordered_json()) == params && m->value("inputs", ordered_json()) == inputs &&
            outputs_intact(m->value("outputs", ordered_json()), dir)) {
            report.cache_hit = true;
            for (const auto& w : m->value("warnings", ordered_json::array())) report.warnings.push_back(w);
            if (log_) *log_ << "[" << name << "] up to date\n";
            done_[slot] = report;
            return report;
        }
    }

    if (log_) *log_ << "[" << name << "] running\n";
    const std::string started = now_utc();
    fs::remove_all(dir);
    fs::remove(manifest_path(s));
    fs::create_directories(dir);
    detail::Artifacts out(dir);
    detail::StageOutput result;
    try {
        switch (s) {
            case Stage::ingest: result = detail::run_ingest(cfg_, out); break;
            case Stage::score: result = detail::run_score(cfg_, stage_dir(Stage::ingest), out); break;
            case Stage::regress: result = detail::run_regress(cfg_, stage_dir(Stage::score), out); break;
            case Stage::describe: result = detail::run_describe(cfg_, stage_dir(Stage::score), out); break;
        }
    } catch (const ConfigError& e) {
        throw ConfigError(name + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError(name + ": " + e.what());
    }

    ordered_json outputs = ordered_json::object();
    for (const auto& rel : list_files(dir)) outputs[rel] = sha256_file(dir / rel);
    ordered_json manifest;
    manifest["stage"] = name;
    manifest["params"] = params;
    manifest["inputs"] = inputs;
    manifest["outputs"] = outputs;
    manifest["warnings"] = result.warnings;
    manifest["started_at"] = started;
    manifest["finished_at"] = now_utc();
    fs::create_directories(manifest_path(s).parent_path());
    std::ofstream(manifest_path(s), std::ios::binary) << manifest.dump(1) << '\n';

    for (const auto& w : result.warnings)
        if (log_) *log_ << "[" << name << "] warning: " << w << "\n";
    report.warnings = std::move(result.warnings);
    recomputed_[slot] = true;
    done_[slot] = report;
    return report;
}

std::vector<StageReport> Runner::run_all() {
    std::vector<StageReport> out;
    for (Stage s : {Stage::ingest, Stage::score, Stage::regress, Stage::describe}) out.push_back(run(s));
    return out;
}

}  // namespace newsfdi::pipeline
