#include "elute/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct CommonFlags {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

elute::RunConfig load_with_overrides(const CommonFlags& flags) {
    elute::RunConfig config = elute::load_run_config(flags.config);
    if (flags.seed_set) {
        config.sampler.master_seed = flags.seed;
        config.synthesize.seed = flags.seed;
    }
    return config;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"parameter estimation for chromatography models with parallel MCMC and "
                 "clustered convergence diagnostics"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string run_dir;
    double threshold = 0.0;
    double global_threshold = 0.0;
    bool online = false;
    bool offline = false;
    bool resume = false;
    bool serial = false;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* opt = cmd->add_option("--config", flags.config, "run configuration file");
        if (needs_config) {
            opt->required();
        }
        cmd->add_option("--out", flags.out, "output directory");
        cmd->add_option("--seed", flags.seed, "master seed override")
            ->each([&](const std::string&) { flags.seed_set = true; });
    };

    auto* simulate = app.add_subcommand("simulate", "simulate the configured column model");
    add_common(simulate, true);

    auto* synthesize =
        app.add_subcommand("synthesize", "simulate and add Gaussian measurement noise");
    add_common(synthesize, true);

    auto* sample = app.add_subcommand("sample", "run parallel MCMC chains");
    add_common(sample, true);
    sample->add_flag("--online", online, "poll the clustered verdict while sampling");
    sample->add_flag("--offline", offline, "run to the iteration cap (default)");
    sample->add_flag("--resume", resume, "continue a previous run in the output directory");
    sample->add_flag("--serial", serial, "disable OpenMP chain parallelism");
    sample->add_option("--threshold", threshold, "per-cluster R-hat threshold");
    sample->add_option("--global-threshold", global_threshold, "global R-hat threshold");

    auto* diagnose =
        app.add_subcommand("diagnose", "clustered convergence diagnosis of chain dumps");
    add_common(diagnose, false);
    diagnose->add_option("--run", run_dir, "directory with manifest.json and chain dumps")
        ->required();
    diagnose->add_option("--threshold", threshold, "per-cluster R-hat threshold");
    diagnose->add_option("--global-threshold", global_threshold, "global R-hat threshold");

    auto* report = app.add_subcommand("report", "print the diagnostic report to stdout");
    add_common(report, false);
    report->add_option("--run", run_dir, "directory with manifest.json and chain dumps")
        ->required();
    report->add_option("--threshold", threshold, "per-cluster R-hat threshold");
    report->add_option("--global-threshold", global_threshold, "global R-hat threshold");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            const auto config = load_with_overrides(flags);
            return elute::cmd_simulate(config,
                                       flags.out.empty() ? config.output_dir : flags.out);
        }
        if (synthesize->parsed()) {
            const auto config = load_with_overrides(flags);
            return elute::cmd_synthesize(config,
                                         flags.out.empty() ? config.output_dir : flags.out);
        }
        if (sample->parsed()) {
            auto config = load_with_overrides(flags);
            if (threshold > 0.0) {
                config.diagnostics.cluster_threshold = threshold;
            }
            if (global_threshold > 0.0) {
                config.diagnostics.global_threshold = global_threshold;
            }
            elute::SampleOptions options;
            options.online = online && !offline;
            options.resume = resume;
            options.use_openmp = !serial;
            return elute::cmd_sample(config, flags.out.empty() ? config.output_dir : flags.out,
                                     options);
        }
        elute::DiagnosticsConfig diag;
        if (!flags.config.empty()) {
            diag = elute::load_run_config(flags.config).diagnostics;
        }
        if (threshold > 0.0) {
            diag.cluster_threshold = threshold;
        }
        if (global_threshold > 0.0) {
            diag.global_threshold = global_threshold;
        }
        if (diagnose->parsed()) {
            return elute::cmd_diagnose(run_dir, diag, flags.out.empty() ? run_dir : flags.out);
        }
        if (report->parsed()) {
            return elute::cmd_report(run_dir, diag, std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return elute::exit_error;
    }
    return elute::exit_error;
}
