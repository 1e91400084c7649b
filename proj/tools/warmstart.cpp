#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "warmstart/config.hpp"
#include "warmstart/experiments.hpp"
#include "warmstart/util.hpp"

#ifndef WARMSTART_GIT_REV
#define WARMSTART_GIT_REV "unknown"
#endif

int main(int argc, char **argv) {
    using namespace warmstart;
    CLI::App app{"Warm-start variational time evolution experiments"};
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    std::string config_path;
    std::string outdir = "out";
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    bool long_run = false;
    app.add_option("--config", config_path, "Experiment config (key = value with [sections])")
        ->check(CLI::ExistingFile);
    app.add_option("--outdir", outdir, "Output directory")->envname("WARMSTART_OUTDIR")->capture_default_str();
    app.add_option("--seed", seed, "Master seed (overrides [run] seed)");
    app.add_option("--threads", threads, "Worker cap, 0 = all cores")->capture_default_str();
    app.add_flag("--long-run", long_run, "Include the n = 10 system sizes");

    for (const auto &name : subcommand_names()) app.add_subcommand(name)->fallthrough();
    app.require_subcommand(1, 1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitValidation;
    }

    Config cfg;
    try {
        if (!config_path.empty()) cfg = Config::load(config_path);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    set_thread_count(threads);
    RunOptions opts;
    opts.outdir = outdir;
    opts.seed = seed;
    opts.long_run = long_run;
    opts.git = WARMSTART_GIT_REV;
    return run_subcommand(app.get_subcommands().front()->get_name(), cfg, opts, std::cerr);
}
