#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "locobs/cli.hpp"

namespace {

void add_common(CLI::App* sub, locobs::cli::RunOptions& opt, std::string& config, std::string& out,
                std::uint64_t& seed, bool config_required) {
    auto* c = sub->add_option("--config", config, "JSON config file");
    if (config_required) c->required();
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed, "seed overriding the config");
    sub->add_option("--workers", opt.workers, "maximum worker threads")->check(CLI::PositiveNumber);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Local approximation of bipartite and quasi-local observables"};
    app.require_subcommand(1);

    locobs::cli::RunOptions opt;
    std::string config, out;
    std::uint64_t seed = 0;

    auto* defect = app.add_subcommand("defect", "optimize the commutator defect of an operator");
    auto* factor2 = app.add_subcommand("factor2", "random-matrix campaign on the factor 2 of the slice bound");
    auto* chain = app.add_subcommand("chain", "localization curve of an evolved chain observable");
    auto* checks = app.add_subcommand("checks", "randomized invariant suite");
    for (auto* sub : {defect, factor2, chain}) add_common(sub, opt, config, out, seed, true);
    add_common(checks, opt, config, out, seed, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : locobs::cli::kExitConfig;
    }

    auto* sub = app.get_subcommands().front();
    if (!config.empty()) opt.config = config;
    if (!out.empty()) opt.out = out;
    if (sub->count("--seed") > 0) opt.seed = seed;

    if (sub == defect) return locobs::cli::cmd_defect(opt);
    if (sub == factor2) return locobs::cli::cmd_factor2(opt);
    if (sub == chain) return locobs::cli::cmd_chain(opt);
    return locobs::cli::cmd_checks(opt);
}
