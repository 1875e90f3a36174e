#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "fbme/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Euler scheme for fBm-driven equations: experiments and diagnostics"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    long long seed = -1;
    int threads = 0;
    auto* run = app.add_subcommand("run", "run the experiment described by a config file");
    run->add_option("--config", config_path, "INI config file")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "first seed");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--threads", threads, "worker threads");

    int depth = 4;
    auto* tree = app.add_subcommand("tree", "labelled tree utilities");
    auto* dump = tree->add_subcommand("dump", "print the trees of depth 1..N as JSON lines");
    dump->add_option("--depth", depth, "largest depth")->check(CLI::Range(1, 8));
    tree->require_subcommand(1);

    CLI11_PARSE(app, argc, argv);

    if (*dump) {
        fbme::write_tree_dump(depth, std::cout);
        return 0;
    }

    std::map<std::string, std::string> overrides;
    if (seed >= 0) overrides["experiment.seed"] = std::to_string(seed);
    if (!out_dir.empty()) overrides["experiment.output"] = out_dir;
    if (threads > 0) overrides["experiment.threads"] = std::to_string(threads);
    fbme::RunnerConfig cfg;
    try {
        cfg = fbme::load_config(config_path, overrides);
    } catch (const fbme::ConfigError& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return fbme::kExitBadConfig;
    }
    return fbme::run_experiment(cfg, std::cerr);
}
