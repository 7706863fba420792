#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "newsfdi/error.hpp"
#include "newsfdi/pipeline.hpp"

namespace pl = newsfdi::pipeline;

namespace {

enum Exit { ok = 0, config_error = 2, data_error = 3, internal_error = 4 };

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"News-derived business sentiment and firm FDI ownership"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_file;
    std::optional<unsigned> threads;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> ambiguous;
    app.add_option("--config", config_file, "Pipeline config (JSON)")->required();
    app.add_option("--threads", threads, "Worker cap (0 = all cores)");
    app.add_option("--seed", seed, "Base seed for the Monte Carlo check");
    app.add_option("--ambiguous", ambiguous, "Mentions naming several regions")
        ->check(CLI::IsMember({"drop", "keep"}));

    const std::pair<const char*, const char*> commands[] = {
        {"ingest", "Filter the corpus, tag regions, write subcorpus indices"},
        {"score", "Relevance, co-occurrence graphs and SBS per region, theme and slice"},
        {"regress", "Firm regressions and foreign/domestic t-tests"},
        {"describe", "Descriptive tables of the firm file"},
        {"all", "Every stage in order"}};
    for (const auto& [name, help] : commands) app.add_subcommand(name, help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? Exit::ok : Exit::config_error;
    }

    try {
        pl::Config cfg = pl::load_config(config_file);
        if (threads) cfg.threads = *threads;
        if (seed) cfg.seed = *seed;
        if (ambiguous)
            cfg.ambiguous =
                *ambiguous == "keep" ? newsfdi::gazetteer::AmbiguityPolicy::keep : newsfdi::gazetteer::AmbiguityPolicy::drop;

        pl::Runner runner(std::move(cfg), &std::cerr);
        const std::string cmd = app.get_subcommands().front()->get_name();
        if (cmd == "all")
            runner.run_all();
        else if (cmd == "ingest")
            runner.run(pl::Stage::ingest);
        else if (cmd == "score")
            runner.run(pl::Stage::score);
        else if (cmd == "regress")
            runner.run(pl::Stage::regress);
        else
            runner.run(pl::Stage::describe);
    } catch (const newsfdi::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return Exit::config_error;
    } catch (const newsfdi::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return Exit::data_error;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return Exit::internal_error;
    }
    return Exit::ok;
}
