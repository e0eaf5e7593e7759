#include "elute/diagnostics.hpp"

#include "elute/errors.hpp"
#include "elute/kde.hpp"

#include <algorithm>
#include <cmath>

namespace elute {

RhatStats rhat_from_series(const std::vector<std::vector<double>>& series) {
    const int p = static_cast<int>(series.size());
    if (p < 2) {
        throw InsufficientChainsError("R-hat needs at least two chains");
    }
    long k = std::numeric_limits<long>::max();
    for (const auto& s : series) {
        k = std::min(k, static_cast<long>(s.size()));
    }
    if (k < 2) {
        throw InsufficientChainsError("R-hat needs chain length >= 2");
    }

    std::vector<double> means(p, 0.0);
    double grand = 0.0;
    for (int c = 0; c < p; ++c) {
        for (long i = 0; i < k; ++i) {
            means[c] += series[c][i];
        }
        means[c] /= static_cast<double>(k);
        grand += means[c];
    }
    grand /= static_cast<double>(p);

    double between = 0.0;
    for (int c = 0; c < p; ++c) {
        between += (means[c] - grand) * (means[c] - grand);
    }
    between *= static_cast<double>(k) / static_cast<double>(p - 1);

    double within = 0.0;
    for (int c = 0; c < p; ++c) {
        double ss = 0.0;
        for (long i = 0; i < k; ++i) {
            const double d = series[c][i] - means[c];
            ss += d * d;
        }
        within += ss / static_cast<double>(k - 1);
    }
    within /= static_cast<double>(p);
    if (!(within > 0.0)) {
        throw ZeroWithinVarianceError("within-chain variance is zero");
    }

    RhatStats stats;
    stats.k = k;
    stats.between = between;
    stats.within = within;
    const double kd = static_cast<double>(k);
    stats.var_plus = (kd - 1.0) / kd * within + between / kd;
    // Ratio form keeps the identical-chain case sqrt((k-1)/k) exact.
    stats.rhat = std::sqrt((kd - 1.0) / kd + between / (within * kd));
    return stats;
}

RhatReport compute_rhat(const ChainStore& store, const std::vector<int>& chains,
                        double threshold) {
    if (chains.size() < 2) {
        throw InsufficientChainsError("R-hat needs at least two chains");
    }
    const int n = store.n_params();
    RhatReport report;
    report.chains = chains;
    report.threshold = threshold;
    report.rhat.resize(n);
    report.between.resize(n);
    report.within.resize(n);
    report.var_plus.resize(n);
    for (int param = 0; param < n; ++param) {
        std::vector<std::vector<double>> series;
        series.reserve(chains.size());
        for (const int c : chains) {
            series.push_back(store.parameter_series(c, param, true));
        }
        const RhatStats stats = rhat_from_series(series);
        report.rhat[param] = stats.rhat;
        report.between[param] = stats.between;
        report.within[param] = stats.within;
        report.var_plus[param] = stats.var_plus;
        report.k = stats.k;
    }
    return report;
}

double effective_sample_size(const std::vector<double>& mixed) {
    const long k = static_cast<long>(mixed.size());
    if (k < 2) {
        throw ConfigError("effective sample size needs >= 2 samples");
    }
    double mean = 0.0;
    for (const double v : mixed) {
        mean += v;
    }
    mean /= static_cast<double>(k);
    double var = 0.0;
    for (const double v : mixed) {
        var += (v - mean) * (v - mean);
    }
    if (!(var > 0.0)) {
        throw ZeroWithinVarianceError("autocorrelation undefined for a constant series");
    }

    auto autocorr = [&](long t) {
        double num = 0.0;
        for (long i = 0; i + t < k; ++i) {
            num += (mixed[i] - mean) * (mixed[i + t] - mean);
        }
        return num / var;
    };
    // Sum rho_t while consecutive pairs stay non-negative; the failing pair is
    // excluded entirely. Lag scan capped to keep pathological series cheap.
    const long max_lag = std::min<long>(k - 1, 5000);
    double acc = 0.0;
    double rho_t = max_lag >= 1 ? autocorr(1) : 0.0;
    for (long t = 1; t < max_lag; ++t) {
        const double rho_next = autocorr(t + 1);
        if (rho_t + rho_next < 0.0) {
            break;
        }
        acc += rho_t;
        rho_t = rho_next;
    }
    const double denom = 1.0 + 2.0 * acc;
    return static_cast<double>(k) / std::max(denom, 1e-12);
}

FeatureMatrix featurize_chains(const ChainStore& store, int grid_points) {
    const int p = store.n_chains();
    const int n = store.n_params();
    if (p < 1) {
        throw InsufficientChainsError("featurization needs at least one chain");
    }
    if (grid_points < 2) {
        throw ConfigError("featurization needs >= 2 grid points");
    }
    for (int c = 0; c < p; ++c) {
        if (store.post_burn_length(c) < 10) {
            throw ConfigError("featurization needs >= 10 post-burn-in samples per chain");
        }
    }
    FeatureMatrix fm;
    fm.grid_points = grid_points;
    fm.X.resize(p, static_cast<long>(n) * grid_points);
    for (int c = 0; c < p; ++c) {
        fm.chain_labels.push_back(store.label(c));
    }

    for (int param = 0; param < n; ++param) {
        std::vector<std::vector<double>> series(p);
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < p; ++c) {
            series[c] = store.parameter_series(c, param, true);
            for (const double v : series[c]) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        if (!(hi > lo)) {
            hi = lo + 1.0; // all chains constant at one value
        }
        Eigen::VectorXd grid(grid_points);
        for (int g = 0; g < grid_points; ++g) {
            grid[g] = lo + (hi - lo) * static_cast<double>(g) / (grid_points - 1);
        }
        fm.grids.push_back(grid);
        const std::span<const double> grid_span(grid.data(), static_cast<size_t>(grid_points));
        for (int c = 0; c < p; ++c) {
            double bandwidth = 0.0;
            bool spike = false;
            try {
                bandwidth = silverman_bandwidth(series[c]);
            } catch (const std::invalid_argument&) {
                bandwidth = 0.0;
            }
            if (!(bandwidth > 0.0)) {
                spike = true;
            }
            const auto density = kde_gaussian(series[c], grid_span, bandwidth);
            for (int g = 0; g < grid_points; ++g) {
                fm.X(c, static_cast<long>(param) * grid_points + g) = density[g];
            }
            if (spike) {
                fm.degenerate.emplace_back(c, param);
            }
        }
    }
    return fm;
}

std::string verdict_status_name(DiagnosticVerdict::Status status) {
    switch (status) {
    case DiagnosticVerdict::Status::converged_global:
        return "converged (global)";
    case DiagnosticVerdict::Status::converged_clustered:
        return "converged (per cluster)";
    case DiagnosticVerdict::Status::not_converged:
        return "not converged";
    case DiagnosticVerdict::Status::non_assessable:
        return "non-assessable";
    }
    return "unknown";
}

namespace {

Eigen::VectorXd cluster_ess(const ChainStore& store, const std::vector<int>& chains) {
    const int n = store.n_params();
    Eigen::VectorXd ess(n);
    for (int param = 0; param < n; ++param) {
        std::vector<double> mixed;
        for (const int c : chains) {
            const auto s = store.parameter_series(c, param, true);
            mixed.insert(mixed.end(), s.begin(), s.end());
        }
        try {
            ess[param] = effective_sample_size(mixed);
        } catch (const std::exception&) {
            ess[param] = std::numeric_limits<double>::quiet_NaN();
        }
    }
    return ess;
}

} // namespace

DiagnosticVerdict clustered_rhat_verdict(const ChainStore& store,
                                         const DiagnosticsConfig& config) {
    const int p = store.n_chains();
    if (p < 2) {
        throw InsufficientChainsError("clustered verdict needs at least two chains");
    }
    DiagnosticVerdict verdict;

    std::vector<int> all(p);
    for (int c = 0; c < p; ++c) {
        all[c] = c;
    }
    verdict.global = compute_rhat(store, all, config.global_threshold);
    verdict.global_ess = cluster_ess(store, all);

    if (verdict.global.max() < config.global_threshold) {
        verdict.status = DiagnosticVerdict::Status::converged_global;
        ClusterDiagnostics whole;
        whole.chains = all;
        whole.assessable = true;
        whole.rhat = verdict.global;
        whole.ess = verdict.global_ess;
        whole.converged = true;
        verdict.clusters.push_back(std::move(whole));
        return verdict;
    }

    // Global mixing failed: cluster the chains and assess per cluster.
    verdict.clustered = true;
    const FeatureMatrix fm = featurize_chains(store, config.feature_points);
    for (const auto& [chain, param] : fm.degenerate) {
        verdict.warnings.push_back("chain " + store.label(chain) + " parameter "
                                   + store.param_names()[param]
                                   + ": zero-variance KDE collapsed to a spike");
    }
    const int k_max = config.k_max > 0 ? std::min(config.k_max, p) : p;

    int k = config.force_k;
    if (k <= 0) {
        if (k_max >= 3) {
            verdict.elbow = elbow_optimal_k(fm.X, k_max, config.seed, config.restarts);
            k = verdict.elbow.k;
            if (verdict.elbow.no_knee) {
                verdict.warnings.push_back(
                    "distortion curve has no knee; defaulting to K = "
                    + std::to_string(k));
            }
        } else {
            k = k_max;
            verdict.warnings.push_back(
                "too few chains for an elbow scan; using K = " + std::to_string(k));
        }
    }
    k = std::max(1, std::min(k, p));

    verdict.assignment = cluster_with(config.method, fm.X, k, config.seed, config.restarts);
    verdict.linkage = hierarchical_cluster(fm.X);

    bool any_assessable = false;
    bool all_assessable_pass = true;
    for (const auto& members : verdict.assignment.members()) {
        ClusterDiagnostics cd;
        cd.chains = members;
        cd.assessable = members.size() >= 2;
        cd.ess = cluster_ess(store, members);
        if (cd.assessable) {
            any_assessable = true;
            cd.rhat = compute_rhat(store, members, config.cluster_threshold);
            cd.converged = cd.rhat->max() < config.cluster_threshold;
            if (!cd.converged) {
                all_assessable_pass = false;
            }
        }
        verdict.clusters.push_back(std::move(cd));
    }

    if (!any_assessable) {
        verdict.status = DiagnosticVerdict::Status::non_assessable;
    } else if (all_assessable_pass) {
        verdict.status = DiagnosticVerdict::Status::converged_clustered;
    } else {
        verdict.status = DiagnosticVerdict::Status::not_converged;
    }
    return verdict;
}

} // namespace elute
