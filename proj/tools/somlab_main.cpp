#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "somlab/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"somlab: seeded SOM process, quantization and categorical-analysis experiments"};
    app.require_subcommand(1);

    struct Args {
        std::string config;
        std::string out = "out";
        std::int64_t seed = -1;
        int workers = 0;
        bool dry_run = false;
    };
    std::map<std::string, Args> args;

    for (const auto& kind : somlab::kExperimentKinds) {
        auto* sub = app.add_subcommand(kind, kind + " experiment");
        auto& a = args[kind];
        sub->add_option("--config", a.config, "experiment config file")->required();
        sub->add_option("--out", a.out, "output directory");
        sub->add_option("--seed", a.seed, "master seed override");
        sub->add_option("--workers", a.workers, "worker threads (default: SOMLAB_WORKERS or all cores)");
        sub->add_flag("--dry-run", a.dry_run, "validate the config and exit");
    }

    CLI11_PARSE(app, argc, argv);

    const std::string kind = app.get_subcommands().front()->get_name();
    const Args& a = args[kind];

    somlab::RunOptions opt;
    opt.out_dir = a.out;
    opt.dry_run = a.dry_run;
    opt.workers = a.workers;
    if (a.seed >= 0) opt.seed_override = static_cast<std::uint64_t>(a.seed);

    try {
        somlab::ConfigFile cfg = somlab::ConfigFile::parse_file(a.config);
        somlab::run_experiment(kind, cfg, opt);
        if (a.dry_run) std::cout << "config ok\n";
    } catch (const somlab::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (!a.dry_run) {
            std::error_code ec;
            std::filesystem::create_directories(a.out, ec);
            if (!ec) {
                std::ofstream diag(std::filesystem::path(a.out) / "error.txt");
                diag << e.what() << "\n";
            }
        }
        return 1;
    }
    return 0;
}
