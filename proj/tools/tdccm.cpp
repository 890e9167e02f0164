// tdccm: command-line front end.
//
//   tdccm stationary|evolve|spectrum|nhip [--config PATH] [--out DIR]
//         [--oracle ed] [--sweep-parallel K] [--seed INT]
//   tdccm verify --suite NAME [--seed INT] [--out DIR]

#include "tdccm/cli/runs.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace tdccm;
using namespace tdccm::cli;

namespace {

struct Flags {
    std::string config;
    std::string out;
    std::string oracle;
    int sweep_parallel = 1;
    std::uint64_t seed = 0;
    std::string suite;
    std::vector<CLI::Option*> seed_opts;
};

void add_common(CLI::App* sub, Flags& f, bool runner) {
    sub->add_option("--config", f.config, "configuration file (key = value or a run manifest)");
    sub->add_option("--out", f.out, "output directory");
    f.seed_opts.push_back(sub->add_option("--seed", f.seed, "random seed"));
    if (runner) {
        sub->add_option("--oracle", f.oracle, "reference oracle")->check(CLI::IsMember({"ed"}));
        sub->add_option("--sweep-parallel", f.sweep_parallel, "worker threads over SUB-N levels")
            ->check(CLI::PositiveNumber);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-dependent coupled cluster workbench for the Rabi model"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1, 1);
    Flags f;
    CLI::App* stationary = app.add_subcommand("stationary", "ground-state continuation sweep in g");
    CLI::App* evolve = app.add_subcommand("evolve", "real-time NCCM/ECCM evolution");
    CLI::App* spectrum = app.add_subcommand("spectrum", "linear-response excitation spectrum");
    CLI::App* nhip = app.add_subcommand("nhip", "three-Hilbert-space certification");
    CLI::App* verify = app.add_subcommand("verify", "algebraic and numerical self-checks");
    for (auto* sub : {stationary, evolve, spectrum, nhip}) {
        add_common(sub, f, true);
    }
    add_common(verify, f, false);
    verify->add_option("--suite", f.suite, "algebra|gradients|brackets|eccm|nhip|all")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        RunConfig cfg = f.config.empty() ? RunConfig{} : load_config(f.config);
        RunOptions opt;
        if (!f.out.empty()) {
            opt.out_dir = f.out;
        }
        for (const auto* o : f.seed_opts) {
            if (o->count() > 0) {
                opt.seed = f.seed;
            }
        }
        opt.oracle_ed = f.oracle == "ed";
        opt.sweep_parallel = f.sweep_parallel;

        if (app.got_subcommand(stationary)) {
            return run_stationary(cfg, opt);
        }
        if (app.got_subcommand(evolve)) {
            return run_evolve(cfg, opt);
        }
        if (app.got_subcommand(spectrum)) {
            return run_spectrum(cfg, opt);
        }
        if (app.got_subcommand(nhip)) {
            return run_nhip(cfg, opt);
        }
        return run_verify(f.suite, cfg, opt);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}
