#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace elute {

/// Append-only record of every draw of every chain: (rho, sigma2, log
/// posterior) per iteration. Chains may have different lengths; diagnostics
/// truncate to the shortest. Rows are never mutated after being appended.
class ChainStore {
public:
    ChainStore() = default;
    ChainStore(std::vector<std::string> param_names, double burn_in_fraction);

    int add_chain(const std::string& label, std::uint64_t seed);
    void append(int chain, const Eigen::VectorXd& rho, double sigma2, double log_post);

    int n_chains() const { return static_cast<int>(chains_.size()); }
    int n_params() const { return static_cast<int>(param_names_.size()); }
    const std::vector<std::string>& param_names() const { return param_names_; }
    double burn_in_fraction() const { return burn_in_fraction_; }

    long length(int chain) const;
    long burn_in_length(int chain) const; // floor(fraction * length)
    long post_burn_length(int chain) const;
    const std::string& label(int chain) const;
    std::uint64_t seed(int chain) const;

    double sample(int chain, long iter, int param) const;
    double sigma2(int chain, long iter) const;
    double log_post(int chain, long iter) const;

    /// Copy of one parameter's series for a chain (optionally post-burn-in).
    std::vector<double> parameter_series(int chain, int param, bool post_burn_in) const;

    /// One CSV per chain (iter,log_post,sigma2,<params...>) plus manifest.json.
    void dump(const std::string& directory) const;
    static ChainStore load(const std::string& directory);

    bool equals(const ChainStore& other) const;

private:
    struct Chain {
        std::string label;
        std::uint64_t seed = 0;
        std::vector<double> samples; // row-major k x n
        std::vector<double> sigma2;
        std::vector<double> log_post;
    };

    std::vector<std::string> param_names_;
    double burn_in_fraction_ = 0.25;
    std::vector<Chain> chains_;
};

} // namespace elute
