#pragma once

#include "elute/diagnostics.hpp"
#include "elute/posterior.hpp"
#include "elute/sampler.hpp"

#include <memory>
#include <string>

namespace elute {

struct MixtureSpec {
    std::vector<GaussianMixtureTarget::Mode> modes;
    Eigen::VectorXd box_lower, box_upper;
    std::vector<std::string> names;
};

struct TargetConfig {
    enum class Kind { mechanistic, mixture };
    Kind kind = Kind::mixture;
    std::string model_file;
    std::string data_file;
    std::vector<ParameterSpec> parameters;
    double alpha0 = 0.5;
    double beta0 = 0.0; // 0 -> from the prior-midpoint variance estimate
    MixtureSpec mixture;
};

struct SynthesizeConfig {
    double sigma2 = 0.0;
    std::uint64_t seed = 1;
    std::string output = "observations.csv";
};

struct RunConfig {
    TargetConfig target;
    SamplerConfig sampler;
    DiagnosticsConfig diagnostics;
    SynthesizeConfig synthesize;
    std::string output_dir = "run";
    std::string base_dir;       // directory of the config file, for relative paths
};

RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& text, const std::string& origin,
                           const std::string& base_dir);

/// Materializes the configured target (loads model and data files for
/// mechanistic targets).
std::unique_ptr<TargetDensity> build_target(const RunConfig& config);

/// Loads just the column system referenced by a mechanistic target.
ColumnSystem load_target_model(const RunConfig& config);

std::string join_path(const std::string& base, const std::string& relative);

} // namespace elute
