#pragma once

#include "elute/chain_store.hpp"
#include "elute/posterior.hpp"
#include "elute/rng.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace elute {

/// Gaussian random-walk proposal: covariance, its Cholesky factor, the
/// delayed-rejection shrink factor and the running sufficient statistics the
/// adaptation uses. The covariance stays symmetric positive definite after
/// every adaptation (epsilon ridge).
struct ProposalState {
    Eigen::MatrixXd covariance;
    Eigen::MatrixXd cholesky; // lower factor of covariance
    double dr_shrink = 0.1;
    double epsilon = 1e-10;
    long adapt_interval = 100; // 0 disables adaptation
    bool frozen = false;

    long history_count = 0;
    Eigen::VectorXd history_sum;
    Eigen::MatrixXd history_outer;

    void set_covariance(const Eigen::MatrixXd& cov);
    void observe(const Eigen::VectorXd& rho);
    int dim() const { return static_cast<int>(covariance.rows()); }
};

struct ChainState {
    Eigen::VectorXd rho;
    double sigma2 = 1.0;
    double log_post = 0.0;
    double sum_squares = 0.0;
    long iteration = 0;
    long accept_first = 0;
    long accept_second = 0;
    long rejected = 0;
    long model_failures = 0;
    RngStream rng;
    std::string label;

    explicit ChainState(std::uint64_t seed) : rng(seed) {}
    double acceptance_rate() const;
};

/// One Metropolis update of rho at fixed sigma2; candidate ~ N(rho, Sigma),
/// accepted when a uniform draw stays below the posterior ratio. With
/// delayed rejection enabled a rejected candidate triggers one second stage
/// with shrunken covariance and the detailed-balance-preserving two-stage
/// acceptance probability.
void metropolis_step(ChainState& state, const TargetDensity& target, ProposalState& proposal,
                     bool delayed_rejection);

/// Second DR stage, exposed for direct testing. `first_candidate` carries the
/// rejected stage-1 proposal and its log posterior.
bool delayed_rejection_stage(ChainState& state, const TargetDensity& target,
                             const ProposalState& proposal,
                             const Eigen::VectorXd& first_candidate,
                             double first_log_post, double first_sum_squares);

/// Sigma2 Gibbs draw from IG(alpha0 + md/2, beta0 + S/2); refreshes the
/// stored log posterior for the new sigma2.
void gibbs_sigma_step(ChainState& state, const TargetDensity& target);

/// Adapt the proposal covariance from accumulated history:
/// Sigma = s_d (Cov + eps I), s_d = 2.4^2 / n. Requires > n samples; with a
/// degenerate (zero-variance) history the ridge alone remains.
void adapt_covariance(ProposalState& proposal);
/// Same update from an explicit history block (rows are samples).
void adapt_covariance(ProposalState& proposal, const Eigen::MatrixXd& history);

struct SamplerConfig {
    int chains = 6;
    long iterations = 10000;
    double burn_in_fraction = 0.25;
    bool delayed_rejection = true;
    double dr_shrink = 0.1;
    long adapt_interval = 100;
    double adapt_epsilon = 1e-10;
    double initial_step_fraction = 0.1; // sigma0 = fraction * sampling range
    std::uint64_t master_seed = 1;
    long online_poll_interval = 0; // iterations between verdicts; 0 = offline
    std::vector<Eigen::VectorXd> initial_points; // optional explicit starts
};

struct ChainStatus {
    std::string label;
    long length = 0;
    double acceptance_rate = 0.0;
    long model_failures = 0;
    std::string error; // empty when the chain completed
};

struct RunReport {
    bool stopped_early = false;
    long iterations_run = 0;
    std::vector<ChainStatus> chains;
};

/// Runs p independent Metropolis-within-Gibbs chains; chains never
/// communicate and own disjoint RNG streams, so the OpenMP and serial paths
/// produce identical stores. The poll callback (online mode) sees the store
/// between rounds and returns true to stop sampling.
using PollCallback = std::function<bool(const ChainStore&)>;

/// Snapshot of one chain sufficient to continue it exactly.
struct PersistedChain {
    ChainState state;
    ProposalState proposal;
};

ChainStore run_parallel(const TargetDensity& target, const SamplerConfig& config,
                        bool use_openmp = true, RunReport* report = nullptr,
                        const PollCallback& poll = nullptr,
                        std::vector<PersistedChain>* persisted_out = nullptr);

void dump_sampler_state(const std::string& directory,
                        const std::vector<PersistedChain>& chains);
std::vector<PersistedChain> load_sampler_state(const std::string& directory, int n_chains,
                                               int dim);

ChainStore resume_parallel(const TargetDensity& target, const SamplerConfig& config,
                           ChainStore store, std::vector<PersistedChain>& persisted,
                           bool use_openmp = true, RunReport* report = nullptr,
                           const PollCallback& poll = nullptr);

} // namespace elute
