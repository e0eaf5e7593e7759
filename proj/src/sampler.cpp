#include "elute/sampler.hpp"

#include "elute/errors.hpp"

#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using nlohmann::json;

namespace elute {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string chain_label(int index) {
    if (index < 26) {
        return std::string(1, static_cast<char>('a' + index));
    }
    return "c" + std::to_string(index);
}

// log(1 - exp(x)) for x <= 0, stable near both ends.
double log1m_exp(double x) {
    if (x >= 0.0) {
        return kNegInf;
    }
    if (x > -0.6931471805599453) {
        return std::log(-std::expm1(x));
    }
    return std::log1p(-std::exp(x));
}

Eigen::VectorXd standard_normals(RngStream& rng, int n) {
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) {
        z[i] = rng.normal();
    }
    return z;
}

// Quadratic form (y - mu)^T Sigma^{-1} (y - mu) via the stored Cholesky factor.
double mahalanobis_sq(const Eigen::MatrixXd& chol, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& mu) {
    const Eigen::VectorXd z =
        chol.triangularView<Eigen::Lower>().solve(y - mu);
    return z.squaredNorm();
}

} // namespace

double ChainState::acceptance_rate() const {
    const long total = accept_first + accept_second + rejected;
    return total > 0 ? static_cast<double>(accept_first + accept_second) / total : 0.0;
}

void ProposalState::set_covariance(const Eigen::MatrixXd& cov) {
    const int n = static_cast<int>(cov.rows());
    Eigen::MatrixXd c = 0.5 * (cov + cov.transpose());
    double ridge = 0.0;
    for (int attempt = 0; attempt < 6; ++attempt) {
        Eigen::LLT<Eigen::MatrixXd> llt(c + ridge * Eigen::MatrixXd::Identity(n, n));
        if (llt.info() == Eigen::Success) {
            covariance = c + ridge * Eigen::MatrixXd::Identity(n, n);
            cholesky = llt.matrixL();
            return;
        }
        ridge = ridge == 0.0 ? std::max(epsilon, 1e-14) : ridge * 100.0;
    }
    throw NumericsError("proposal covariance could not be made positive definite");
}

void ProposalState::observe(const Eigen::VectorXd& rho) {
    if (history_count == 0) {
        history_sum = Eigen::VectorXd::Zero(rho.size());
        history_outer = Eigen::MatrixXd::Zero(rho.size(), rho.size());
    }
    history_sum += rho;
    history_outer.selfadjointView<Eigen::Lower>().rankUpdate(rho, 1.0);
    ++history_count;
}

void adapt_covariance(ProposalState& proposal) {
    const int n = proposal.dim();
    if (proposal.history_count <= n) {
        return; // not enough history yet
    }
    const double count = static_cast<double>(proposal.history_count);
    const Eigen::VectorXd mean = proposal.history_sum / count;
    Eigen::MatrixXd outer = proposal.history_outer.selfadjointView<Eigen::Lower>();
    Eigen::MatrixXd cov = (outer - count * mean * mean.transpose()) / (count - 1.0);
    const double sd = 2.4 * 2.4 / static_cast<double>(n);
    cov = sd * (cov + proposal.epsilon * Eigen::MatrixXd::Identity(n, n));
    proposal.set_covariance(cov);
}

void adapt_covariance(ProposalState& proposal, const Eigen::MatrixXd& history) {
    proposal.history_count = 0;
    for (long r = 0; r < history.rows(); ++r) {
        proposal.observe(history.row(r).transpose());
    }
    adapt_covariance(proposal);
}

bool delayed_rejection_stage(ChainState& state, const TargetDensity& target,
                             const ProposalState& proposal,
                             const Eigen::VectorXd& first_candidate, double first_log_post,
                             double first_sum_squares) {
    (void)first_sum_squares;
    const int n = proposal.dim();
    const double shrink = std::sqrt(proposal.dr_shrink);
    const Eigen::VectorXd z = standard_normals(state.rng, n);
    const Eigen::VectorXd second =
        state.rho + shrink * (proposal.cholesky.triangularView<Eigen::Lower>() * z).eval();
    const double u = state.rng.uniform();

    const auto eval2 = target.evaluate(second, state.sigma2);
    if (!eval2.model_ok) {
        ++state.model_failures;
    }
    if (eval2.log_post == kNegInf) {
        return false;
    }
    // alpha1(second -> first): 1 means the reverse first stage would always
    // accept, so the forward move is impossible.
    const double log_a1_rev = std::min(0.0, first_log_post - eval2.log_post);
    if (log_a1_rev >= 0.0) {
        return false;
    }
    const double log_a1_fwd = std::min(0.0, first_log_post - state.log_post);
    // First-stage proposal density ratio q1(second, first) / q1(current, first);
    // normalization constants cancel (same covariance).
    const double quad_num = mahalanobis_sq(proposal.cholesky, first_candidate, second);
    const double quad_den = mahalanobis_sq(proposal.cholesky, first_candidate, state.rho);
    const double log_ratio = (eval2.log_post - state.log_post)
        - 0.5 * (quad_num - quad_den) + log1m_exp(log_a1_rev) - log1m_exp(log_a1_fwd);

    if (std::log(u) <= std::min(0.0, log_ratio)) {
        state.rho = second;
        state.log_post = eval2.log_post;
        state.sum_squares = eval2.sum_squares;
        ++state.accept_second;
        return true;
    }
    return false;
}

void metropolis_step(ChainState& state, const TargetDensity& target, ProposalState& proposal,
                     bool delayed_rejection) {
    const int n = proposal.dim();
    const Eigen::VectorXd z = standard_normals(state.rng, n);
    const Eigen::VectorXd candidate =
        state.rho + (proposal.cholesky.triangularView<Eigen::Lower>() * z).eval();
    const double u = state.rng.uniform();

    const auto eval = target.evaluate(candidate, state.sigma2);
    if (!eval.model_ok) {
        ++state.model_failures;
    }
    const double log_gamma = eval.log_post - state.log_post;
    if (eval.log_post > kNegInf && std::log(u) <= std::min(0.0, log_gamma)) {
        state.rho = candidate;
        state.log_post = eval.log_post;
        state.sum_squares = eval.sum_squares;
        ++state.accept_first;
        return;
    }
    if (delayed_rejection
        && delayed_rejection_stage(state, target, proposal, candidate, eval.log_post,
                                   eval.sum_squares)) {
        return;
    }
    ++state.rejected;
}

void gibbs_sigma_step(ChainState& state, const TargetDensity& target) {
    if (!target.has_noise_model()) {
        return;
    }
    const NoiseModel* noise = target.noise();
    const double md = target.observation_count();
    const double alpha = noise->alpha0 + 0.5 * md;
    const double beta = noise->beta0 + 0.5 * state.sum_squares;
    state.sigma2 = state.rng.inverse_gamma(alpha, beta);
    state.log_post = target.log_post_for_sigma(state.rho, state.sum_squares, state.sigma2);
}

namespace {

struct Worker {
    ChainState state;
    ProposalState proposal;
    std::string error;

    Worker(ChainState s, ProposalState p) : state(std::move(s)), proposal(std::move(p)) {}
};

void advance_chain(Worker& worker, const TargetDensity& target, const SamplerConfig& config,
                   ChainStore& store, int chain_index, long upto) {
    const long burn_in_end = static_cast<long>(
        std::floor(config.burn_in_fraction * static_cast<double>(config.iterations)));
    try {
        while (worker.state.iteration < upto) {
            metropolis_step(worker.state, target, worker.proposal, config.delayed_rejection);
            gibbs_sigma_step(worker.state, target);
            ++worker.state.iteration;
            const long k = worker.state.iteration;
            if (!worker.proposal.frozen) {
                worker.proposal.observe(worker.state.rho);
                if (worker.proposal.adapt_interval > 0 && k % worker.proposal.adapt_interval == 0
                    && k < burn_in_end) {
                    adapt_covariance(worker.proposal);
                }
                if (k >= burn_in_end) {
                    worker.proposal.frozen = true;
                }
            }
            store.append(chain_index, worker.state.rho, worker.state.sigma2,
                         worker.state.log_post);
        }
    } catch (const std::exception& e) {
        worker.error = e.what();
    }
}

ChainStore drive_rounds(const TargetDensity& target, const SamplerConfig& config,
                        ChainStore store, std::vector<Worker>& workers, bool use_openmp,
                        RunReport* report, const PollCallback& poll) {
    const int p = static_cast<int>(workers.size());
    const long poll_every =
        config.online_poll_interval > 0 ? config.online_poll_interval : config.iterations;
    bool stopped_early = false;
    long reached = 0;
    for (int c = 0; c < p; ++c) {
        reached = std::max(reached, workers[c].state.iteration);
    }
    while (reached < config.iterations && !stopped_early) {
        const long next = std::min(config.iterations, reached + poll_every);
#ifdef _OPENMP
        if (use_openmp) {
#pragma omp parallel for schedule(static)
            for (int c = 0; c < p; ++c) {
                if (workers[c].error.empty()) {
                    advance_chain(workers[c], target, config, store, c, next);
                }
            }
        } else
#endif
        {
            (void)use_openmp;
            for (int c = 0; c < p; ++c) {
                if (workers[c].error.empty()) {
                    advance_chain(workers[c], target, config, store, c, next);
                }
            }
        }
        reached = next;
        bool all_failed = true;
        for (const auto& w : workers) {
            if (w.error.empty()) {
                all_failed = false;
            }
        }
        if (all_failed) {
            break;
        }
        if (poll && reached < config.iterations) {
            if (poll(store)) {
                stopped_early = true;
            }
        }
    }
    if (report) {
        report->stopped_early = stopped_early;
        report->iterations_run = reached;
        report->chains.clear();
        for (int c = 0; c < p; ++c) {
            ChainStatus status;
            status.label = workers[c].state.label;
            status.length = store.length(c);
            status.acceptance_rate = workers[c].state.acceptance_rate();
            status.model_failures = workers[c].state.model_failures;
            status.error = workers[c].error;
            report->chains.push_back(std::move(status));
        }
    }
    return store;
}

} // namespace

ChainStore run_parallel(const TargetDensity& target, const SamplerConfig& config,
                        bool use_openmp, RunReport* report, const PollCallback& poll,
                        std::vector<PersistedChain>* persisted_out) {
    if (config.chains < 1) {
        throw ConfigError("sampler needs at least one chain");
    }
    if (config.iterations < 1) {
        throw ConfigError("sampler needs a positive iteration cap");
    }
    if (!(config.burn_in_fraction >= 0.0) || !(config.burn_in_fraction < 1.0)) {
        throw ConfigError("burn-in fraction must lie in [0, 1)");
    }
    const int n = target.dim();
    ChainStore store(target.parameter_names(), config.burn_in_fraction);
    std::vector<Worker> workers;
    workers.reserve(config.chains);

    const Eigen::VectorXd ranges = target.sampling_ranges();
    for (int c = 0; c < config.chains; ++c) {
        ChainState state(RngStream::substream_seed(config.master_seed, c));
        state.label = chain_label(c);
        state.sigma2 = target.initial_sigma2();

        bool initialized = false;
        if (c < static_cast<int>(config.initial_points.size())) {
            state.rho = config.initial_points[c];
            if (state.rho.size() != n) {
                throw ConfigError("initial point dimension mismatch for chain "
                                  + state.label);
            }
            const auto eval = target.evaluate(state.rho, state.sigma2);
            if (eval.log_post == kNegInf) {
                throw ConfigError("initial point for chain " + state.label
                                  + " has zero posterior density");
            }
            state.log_post = eval.log_post;
            state.sum_squares = eval.sum_squares;
            initialized = true;
        }
        for (int attempt = 0; !initialized && attempt < 200; ++attempt) {
            state.rho = target.draw_start(state.rng);
            const auto eval = target.evaluate(state.rho, state.sigma2);
            if (eval.log_post > kNegInf) {
                state.log_post = eval.log_post;
                state.sum_squares = eval.sum_squares;
                initialized = true;
            }
        }
        if (!initialized) {
            throw NumericsError("could not find a valid starting point for chain "
                                + state.label);
        }

        ProposalState proposal;
        proposal.dr_shrink = config.dr_shrink;
        proposal.epsilon = config.adapt_epsilon;
        proposal.adapt_interval = config.adapt_interval;
        Eigen::VectorXd scale = (config.initial_step_fraction * ranges.array()).matrix();
        proposal.set_covariance(scale.array().square().matrix().asDiagonal());

        store.add_chain(state.label, RngStream::substream_seed(config.master_seed, c));
        workers.emplace_back(std::move(state), std::move(proposal));
    }

    ChainStore result =
        drive_rounds(target, config, std::move(store), workers, use_openmp, report, poll);
    if (persisted_out) {
        persisted_out->clear();
        for (auto& w : workers) {
            persisted_out->push_back(PersistedChain{std::move(w.state), std::move(w.proposal)});
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Resumable state

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (long r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (long c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    const long rows = static_cast<long>(j.size());
    const long cols = rows > 0 ? static_cast<long>(j[0].size()) : 0;
    Eigen::MatrixXd m(rows, cols);
    for (long r = 0; r < rows; ++r) {
        for (long c = 0; c < cols; ++c) {
            m(r, c) = j[r][c].get<double>();
        }
    }
    return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (long i = 0; i < v.size(); ++i) {
        out.push_back(v[i]);
    }
    return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
    Eigen::VectorXd v(static_cast<long>(j.size()));
    for (long i = 0; i < v.size(); ++i) {
        v[i] = j[i].get<double>();
    }
    return v;
}

} // namespace

void dump_sampler_state(const std::string& directory,
                        const std::vector<PersistedChain>& chains) {
    json root = json::array();
    for (const auto& pc : chains) {
        json entry;
        entry["label"] = pc.state.label;
        entry["rho"] = vector_to_json(pc.state.rho);
        entry["sigma2"] = pc.state.sigma2;
        entry["log_post"] = pc.state.log_post;
        entry["sum_squares"] = pc.state.sum_squares;
        entry["iteration"] = pc.state.iteration;
        entry["accept_first"] = pc.state.accept_first;
        entry["accept_second"] = pc.state.accept_second;
        entry["rejected"] = pc.state.rejected;
        entry["model_failures"] = pc.state.model_failures;
        std::ostringstream rng;
        pc.state.rng.save(rng);
        entry["rng"] = rng.str();
        entry["covariance"] = matrix_to_json(pc.proposal.covariance);
        entry["dr_shrink"] = pc.proposal.dr_shrink;
        entry["epsilon"] = pc.proposal.epsilon;
        entry["adapt_interval"] = pc.proposal.adapt_interval;
        entry["frozen"] = pc.proposal.frozen;
        entry["history_count"] = pc.proposal.history_count;
        if (pc.proposal.history_count > 0) {
            entry["history_sum"] = vector_to_json(pc.proposal.history_sum);
            entry["history_outer"] = matrix_to_json(pc.proposal.history_outer);
        }
        root.push_back(std::move(entry));
    }
    std::ofstream out(std::filesystem::path(directory) / "sampler_state.json");
    if (!out) {
        throw ConfigError("cannot write sampler state in " + directory);
    }
    out << root.dump(2) << "\n";
}

std::vector<PersistedChain> load_sampler_state(const std::string& directory, int n_chains,
                                               int dim) {
    std::ifstream in(std::filesystem::path(directory) / "sampler_state.json");
    if (!in) {
        throw ConfigError("cannot open sampler state in " + directory);
    }
    json root;
    in >> root;
    if (static_cast<int>(root.size()) != n_chains) {
        throw ConfigError("sampler state chain count mismatch");
    }
    std::vector<PersistedChain> chains;
    for (const auto& entry : root) {
        ChainState state(0);
        state.label = entry.at("label").get<std::string>();
        state.rho = vector_from_json(entry.at("rho"));
        if (state.rho.size() != dim) {
            throw ConfigError("sampler state dimension mismatch");
        }
        state.sigma2 = entry.at("sigma2").get<double>();
        state.log_post = entry.at("log_post").get<double>();
        state.sum_squares = entry.at("sum_squares").get<double>();
        state.iteration = entry.at("iteration").get<long>();
        state.accept_first = entry.at("accept_first").get<long>();
        state.accept_second = entry.at("accept_second").get<long>();
        state.rejected = entry.at("rejected").get<long>();
        state.model_failures = entry.at("model_failures").get<long>();
        std::istringstream rng(entry.at("rng").get<std::string>());
        state.rng.load(rng);

        ProposalState proposal;
        proposal.dr_shrink = entry.at("dr_shrink").get<double>();
        proposal.epsilon = entry.at("epsilon").get<double>();
        proposal.adapt_interval = entry.at("adapt_interval").get<long>();
        proposal.frozen = entry.at("frozen").get<bool>();
        proposal.set_covariance(matrix_from_json(entry.at("covariance")));
        proposal.history_count = entry.at("history_count").get<long>();
        if (proposal.history_count > 0) {
            proposal.history_sum = vector_from_json(entry.at("history_sum"));
            proposal.history_outer = matrix_from_json(entry.at("history_outer"));
        }
        chains.push_back(PersistedChain{std::move(state), std::move(proposal)});
    }
    return chains;
}

ChainStore resume_parallel(const TargetDensity& target, const SamplerConfig& config,
                           ChainStore store, std::vector<PersistedChain>& persisted,
                           bool use_openmp, RunReport* report, const PollCallback& poll) {
    if (static_cast<int>(persisted.size()) != store.n_chains()) {
        throw ConfigError("resume state does not match the chain store");
    }
    std::vector<Worker> workers;
    workers.reserve(persisted.size());
    for (auto& pc : persisted) {
        workers.emplace_back(std::move(pc.state), std::move(pc.proposal));
    }
    ChainStore result =
        drive_rounds(target, config, std::move(store), workers, use_openmp, report, poll);
    persisted.clear();
    for (auto& w : workers) {
        persisted.push_back(PersistedChain{std::move(w.state), std::move(w.proposal)});
    }
    return result;
}

} // namespace elute
