#include <cstdio>
#include <functional>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "pointwave/errors.hpp"
#include "pointwave/experiment.hpp"

using namespace pointwave;

int main(int argc, char** argv) {
    CLI::App app{"pointwave: point-scatterer approximation toolkit for high-contrast "
                 "wave scattering"};
    app.require_subcommand(1);

    std::string config_path;
    CliOverrides overrides;
    double eps_override = -1.0;
    std::string out_dir;
    int threads = -1;
    long long seed = -1;

    const std::map<std::string, std::function<int(const ExperimentConfig&)>> pipelines = {
        {"spectrum", cmd_spectrum},   {"forcing", cmd_forcing},
        {"modulation", cmd_modulation}, {"effective", cmd_effective},
        {"fdtd", cmd_fdtd},           {"compare", cmd_compare},
        {"sweep", cmd_sweep},
    };
    const std::map<std::string, std::string> blurbs = {
        {"spectrum", "Newton-potential eigenpairs and couplings of the inclusion"},
        {"forcing", "forcing signal h(t) at the scatterer location"},
        {"modulation", "modulation signal q(t) by both routes, with the equivalence gate"},
        {"effective", "sample the effective field on the comparison grid"},
        {"fdtd", "one brute-force contrast run with probes and snapshots"},
        {"compare", "error-table rows for the configured eps values"},
        {"sweep", "full eps sweep: error table, slope fits, plot script"},
    };

    std::vector<CLI::App*> subs;
    for (const auto& [name, fn] : pipelines) {
        (void)fn;
        CLI::App* sub = app.add_subcommand(name, blurbs.at(name));
        sub->add_option("--config", config_path, "experiment config file")->required();
        sub->add_option("--eps", eps_override, "override the eps list with one value");
        sub->add_option("--out", out_dir, "output directory override");
        sub->add_option("--threads", threads, "worker thread count (0 = library default)");
        sub->add_option("--seed", seed, "seed override for the Krylov start vector");
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_code::usage;
    }

    if (eps_override >= 0.0) overrides.eps = eps_override;
    if (!out_dir.empty()) overrides.out_dir = out_dir;
    if (threads >= 0) overrides.threads = threads;
    if (seed >= 0) overrides.seed = std::uint64_t(seed);

    try {
        const ExperimentConfig cfg = load_config(config_path, overrides);
        for (const auto& [name, fn] : pipelines)
            if (app.get_subcommand(name)->parsed()) return fn(cfg);
        return exit_code::usage;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return exit_code::validation;
    } catch (const QualityError& e) {
        std::fprintf(stderr, "numerical-quality failure: %s\n", e.what());
        return exit_code::quality;
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return exit_code::validation;
    }
}
