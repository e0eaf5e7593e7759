#pragma once

#include "elute/run_config.hpp"

#include <iosfwd>
#include <string>

namespace elute {

/// Exit codes shared by the pipeline commands and the CLI:
/// 0 converged, 2 not converged at the iteration cap, 3 non-assessable,
/// 1 error (raised as exceptions and mapped by the caller).
enum ExitCode : int {
    exit_converged = 0,
    exit_error = 1,
    exit_not_converged = 2,
    exit_non_assessable = 3,
};

int verdict_exit_code(const DiagnosticVerdict& verdict);

/// Simulates the configured column model and writes chromatogram.csv.
int cmd_simulate(const RunConfig& config, const std::string& out_dir);

/// Simulates, adds iid Gaussian noise (synthesize.sigma2, fixed seed) and
/// writes the observations file.
int cmd_synthesize(const RunConfig& config, const std::string& out_dir);

struct SampleOptions {
    bool online = false;
    bool resume = false;
    bool use_openmp = true;
};

/// Runs the parallel sampler, writes chain dumps + manifest + sampler state
/// + diagnostic report; the exit code encodes the final verdict.
int cmd_sample(const RunConfig& config, const std::string& out_dir,
               const SampleOptions& options = {});

/// Re-runs diagnostics on chain dumps in `run_dir`, writing report files to
/// `out_dir`.
int cmd_diagnose(const std::string& run_dir, const DiagnosticsConfig& diagnostics,
                 const std::string& out_dir);

/// Diagnostics rendered to a stream instead of files.
int cmd_report(const std::string& run_dir, const DiagnosticsConfig& diagnostics,
               std::ostream& os);

} // namespace elute
