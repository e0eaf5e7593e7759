#include "elute/pipeline.hpp"

#include "elute/csv.hpp"
#include "elute/errors.hpp"
#include "elute/report.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace fs = std::filesystem;

namespace elute {

int verdict_exit_code(const DiagnosticVerdict& verdict) {
    switch (verdict.status) {
    case DiagnosticVerdict::Status::converged_global:
    case DiagnosticVerdict::Status::converged_clustered:
        return exit_converged;
    case DiagnosticVerdict::Status::non_assessable:
        return exit_non_assessable;
    case DiagnosticVerdict::Status::not_converged:
        return exit_not_converged;
    }
    return exit_error;
}

namespace {

void write_chromatogram(const std::string& path, const Chromatogram& chromatogram) {
    std::vector<std::string> header = {"time_s"};
    for (long i = 0; i < chromatogram.concentrations.cols(); ++i) {
        header.push_back("component_" + std::to_string(i));
    }
    std::vector<std::vector<double>> rows;
    rows.reserve(chromatogram.times.size());
    for (size_t r = 0; r < chromatogram.times.size(); ++r) {
        std::vector<double> row = {chromatogram.times[r]};
        for (long i = 0; i < chromatogram.concentrations.cols(); ++i) {
            row.push_back(chromatogram.concentrations(r, i));
        }
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

} // namespace

int cmd_simulate(const RunConfig& config, const std::string& out_dir) {
    const ColumnSystem model = load_target_model(config);
    const SystemResult result = simulate_system(model);
    fs::create_directories(out_dir);
    write_chromatogram((fs::path(out_dir) / "chromatogram.csv").string(),
                       result.chromatogram);
    if (!result.warnings.empty()) {
        std::ofstream wf(fs::path(out_dir) / "warnings.txt");
        for (const auto& w : result.warnings) {
            wf << w << "\n";
        }
    }
    return exit_converged;
}

int cmd_synthesize(const RunConfig& config, const std::string& out_dir) {
    if (config.synthesize.sigma2 < 0.0) {
        throw ConfigError("synthesize.sigma2 must be non-negative");
    }
    const ColumnSystem model = load_target_model(config);
    const SystemResult result = simulate_system(model);
    Chromatogram noisy = result.chromatogram;
    if (config.synthesize.sigma2 > 0.0) {
        RngStream rng(config.synthesize.seed);
        const double sd = std::sqrt(config.synthesize.sigma2);
        for (long r = 0; r < noisy.concentrations.rows(); ++r) {
            for (long c = 0; c < noisy.concentrations.cols(); ++c) {
                noisy.concentrations(r, c) += sd * rng.normal();
            }
        }
    }
    fs::create_directories(out_dir);
    write_chromatogram((fs::path(out_dir) / config.synthesize.output).string(), noisy);
    return exit_converged;
}

int cmd_sample(const RunConfig& config, const std::string& out_dir,
               const SampleOptions& options) {
    const auto target = build_target(config);
    fs::create_directories(out_dir);

    DiagnosticsConfig diag = config.diagnostics;
    PollCallback poll;
    if (options.online) {
        poll = [&](const ChainStore& store) {
            if (store.n_chains() < 2) {
                return false;
            }
            for (int c = 0; c < store.n_chains(); ++c) {
                if (store.post_burn_length(c) < 10) {
                    return false;
                }
            }
            try {
                return clustered_rhat_verdict(store, diag).converged();
            } catch (const std::exception&) {
                return false;
            }
        };
    }

    SamplerConfig sampler = config.sampler;
    if (options.online && sampler.online_poll_interval <= 0) {
        sampler.online_poll_interval = std::max<long>(sampler.iterations / 20, 1);
    }
    if (!options.online) {
        sampler.online_poll_interval = 0;
    }

    RunReport run_report;
    std::vector<PersistedChain> persisted;
    ChainStore store;
    if (options.resume) {
        ChainStore existing = ChainStore::load(out_dir);
        persisted = load_sampler_state(out_dir, existing.n_chains(), target->dim());
        store = resume_parallel(*target, sampler, std::move(existing), persisted,
                                options.use_openmp, &run_report, poll);
    } else {
        store = run_parallel(*target, sampler, options.use_openmp, &run_report, poll,
                             &persisted);
    }

    store.dump(out_dir);
    dump_sampler_state(out_dir, persisted);

    {
        std::ofstream status(fs::path(out_dir) / "status.txt");
        for (const auto& chain : run_report.chains) {
            status << chain.label << " length=" << chain.length
                   << " acceptance=" << format_double(chain.acceptance_rate)
                   << " model_failures=" << chain.model_failures
                   << (chain.error.empty() ? "" : " error=" + chain.error) << "\n";
        }
        status << "stopped_early=" << (run_report.stopped_early ? 1 : 0) << "\n";
    }

    bool any_failed = false;
    for (const auto& chain : run_report.chains) {
        if (!chain.error.empty()) {
            any_failed = true;
        }
    }

    if (store.n_chains() < 2) {
        return exit_non_assessable;
    }
    const DiagnosticVerdict verdict = clustered_rhat_verdict(store, diag);
    write_diagnostic_report(out_dir, verdict, store, diag);
    if (any_failed) {
        return exit_error;
    }
    return verdict_exit_code(verdict);
}

int cmd_diagnose(const std::string& run_dir, const DiagnosticsConfig& diagnostics,
                 const std::string& out_dir) {
    const ChainStore store = ChainStore::load(run_dir);
    if (store.n_chains() < 2) {
        throw InsufficientChainsError("diagnosis needs at least two chain dumps");
    }
    const DiagnosticVerdict verdict = clustered_rhat_verdict(store, diagnostics);
    write_diagnostic_report(out_dir, verdict, store, diagnostics);
    return verdict_exit_code(verdict);
}

int cmd_report(const std::string& run_dir, const DiagnosticsConfig& diagnostics,
               std::ostream& os) {
    const ChainStore store = ChainStore::load(run_dir);
    if (store.n_chains() < 2) {
        throw InsufficientChainsError("report needs at least two chain dumps");
    }
    const DiagnosticVerdict verdict = clustered_rhat_verdict(store, diagnostics);
    os << render_diagnostic_report(verdict, store, diagnostics);
    return verdict_exit_code(verdict);
}

} // namespace elute
