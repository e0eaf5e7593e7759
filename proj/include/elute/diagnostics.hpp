#pragma once

#include "elute/chain_store.hpp"
#include "elute/cluster.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace elute {

struct RhatStats {
    double rhat = 0.0;
    double between = 0.0;  // B
    double within = 0.0;   // W
    double var_plus = 0.0; // ((k-1)/k) W + B/k
    long k = 0;            // common post-burn-in length used
};

/// Potential scale reduction factor over >= 2 equal-length series
/// (series are truncated to the shortest). Throws ZeroWithinVarianceError
/// when W = 0 and InsufficientChainsError for < 2 series.
RhatStats rhat_from_series(const std::vector<std::vector<double>>& series);

struct RhatReport {
    std::vector<int> chains;   // store indices used
    Eigen::VectorXd rhat;      // per parameter
    Eigen::VectorXd between;
    Eigen::VectorXd within;
    Eigen::VectorXd var_plus;
    long k = 0;
    double threshold = 0.0;
    double max() const { return rhat.size() > 0 ? rhat.maxCoeff() : 0.0; }
};

RhatReport compute_rhat(const ChainStore& store, const std::vector<int>& chains,
                        double threshold);

/// Effective sample size of a mixed (pooled) series: length / (1 + 2 sum of
/// autocorrelations), the sum truncated at the first lag where rho_t +
/// rho_{t+1} turns negative. Throws on constant or too-short series.
double effective_sample_size(const std::vector<double>& mixed);

struct FeatureMatrix {
    Eigen::MatrixXd X;               // p x (n*s)
    int grid_points = 0;             // s
    std::vector<Eigen::VectorXd> grids; // shared per-parameter grids
    std::vector<std::string> chain_labels;
    std::vector<std::pair<int, int>> degenerate; // (chain, param) KDE spikes
};

/// Kernel-density feature map: per parameter a Gaussian KDE (Silverman
/// bandwidth) evaluated on s points spanning the pooled post-burn-in range of
/// all chains, concatenated per chain into one row.
FeatureMatrix featurize_chains(const ChainStore& store, int grid_points = 64);

struct DiagnosticsConfig {
    double global_threshold = 1.20;
    double cluster_threshold = 1.10;
    int feature_points = 64;
    int k_max = 0;   // 0 -> number of chains
    int force_k = 0; // 0 -> elbow decides
    ClusterMethod method = ClusterMethod::kmeans;
    int restarts = 10;
    std::uint64_t seed = 12345;
};

struct ClusterDiagnostics {
    std::vector<int> chains;
    bool assessable = false; // >= 2 chains
    std::optional<RhatReport> rhat;
    Eigen::VectorXd ess; // per parameter, NaN when undefined
    bool converged = false;
};

struct DiagnosticVerdict {
    enum class Status { converged_global, converged_clustered, not_converged, non_assessable };

    Status status = Status::not_converged;
    RhatReport global;
    Eigen::VectorXd global_ess;
    bool clustered = false;
    ElbowResult elbow;
    ClusterAssignment assignment;
    DendrogramLinkage linkage;
    std::vector<ClusterDiagnostics> clusters;
    std::vector<std::string> warnings;

    bool converged() const {
        return status == Status::converged_global || status == Status::converged_clustered;
    }
};

/// Two-stage convergence assessment: global R-hat short-circuit, otherwise
/// KDE featurization, elbow-selected K, clustering and per-cluster R-hat.
/// Singleton clusters are reported non-assessable.
DiagnosticVerdict clustered_rhat_verdict(const ChainStore& store,
                                         const DiagnosticsConfig& config);

std::string verdict_status_name(DiagnosticVerdict::Status status);

} // namespace elute
