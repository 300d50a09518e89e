// Experiment front end: sample / calibrate / diagnose / compare subcommands
// over a JSON experiment config, emitting CSV chains and JSON summaries.

#include <cstdlib>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "drmcmc/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"delayed-rejection MCMC experiment runner"};
    app.require_subcommand(1);

    drmcmc::cli::Options opts;
    if (const char* env = std::getenv("DRMCMC_CACHE_DIR")) opts.cache_dir = env;

    std::uint64_t seed_override = 0;
    bool have_seed = false;
    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* copt = cmd->add_option("--config", opts.config_path, "JSON experiment config");
        if (needs_config) copt->required();
        cmd->add_option("--seed", seed_override, "override the config seed")
            ->each([&](const std::string&) { have_seed = true; });
        cmd->add_option("--out", opts.out_dir, "output directory");
        cmd->add_option("--threads", opts.threads, "worker threads for grid sweeps");
        cmd->add_option("--cache", opts.cache_dir, "calibration cell-cache directory");
    };

    CLI::App* sample = app.add_subcommand("sample", "run one chain, write CSV + summary");
    add_common(sample, true);

    CLI::App* calibrate = app.add_subcommand("calibrate", "run a proposal-loss grid sweep");
    add_common(calibrate, true);

    CLI::App* diagnose = app.add_subcommand("diagnose", "ACF / tau_int report for a chain CSV");
    std::string chain_path;
    long discard = 0;
    diagnose->add_option("--chain", chain_path, "chain CSV file")->required();
    diagnose->add_option("--discard", discard, "initial states to drop before analysis");
    add_common(diagnose, false);

    CLI::App* compare = app.add_subcommand("compare", "equal-budget A/B/C comparison");
    add_common(compare, true);

    CLI11_PARSE(app, argc, argv);
    if (have_seed) opts.seed = seed_override;

    if (sample->parsed()) return drmcmc::cli::cmd_sample(opts);
    if (calibrate->parsed()) return drmcmc::cli::cmd_calibrate(opts);
    if (diagnose->parsed()) return drmcmc::cli::cmd_diagnose(chain_path, discard, opts);
    if (compare->parsed()) return drmcmc::cli::cmd_compare(opts);
    return drmcmc::cli::kValidationError;
}
