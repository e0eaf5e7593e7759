#pragma once

#include "elute/model_config.hpp"
#include "elute/rng.hpp"
#include "elute/system.hpp"

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <vector>

namespace elute {

enum class Transform { linear, logarithmic };

/// One estimated parameter: uniform prior bounds in the original space and
/// the transform applied for sampling. `paths` lists every model field the
/// parameter drives (mirrored units share one parameter).
struct ParameterSpec {
    std::string name;
    double lower = 0.0;
    double upper = 0.0;
    Transform transform = Transform::logarithmic;
    std::vector<std::string> paths;

    void validate() const;
    double to_sampling(double eta) const;   // rho = ln(eta) for log transforms
    double from_sampling(double rho) const; // eta = exp(rho)
    double sampling_lower() const { return to_sampling(lower); }
    double sampling_upper() const { return to_sampling(upper); }
};

struct NoiseModel {
    double alpha0 = 0.5;
    double beta0 = 0.5;
    double sigma2_init = 1.0;
};

/// Measured detector series: time grid plus one column per observed
/// component (matching chromatogram component indices).
struct Observations {
    std::vector<double> times;
    Eigen::MatrixXd values; // d x m
    std::vector<int> components;

    long rows() const { return values.rows(); }
    long comps() const { return values.cols(); }
    long count() const { return values.size(); } // m*d
};

Observations load_observations(const std::string& path, int model_components);

/// Unnormalized log target over the sampling-space parameters. Evaluators are
/// immutable after construction and safe to share across chains.
class TargetDensity {
public:
    virtual ~TargetDensity() = default;
    virtual int dim() const = 0;
    virtual std::vector<std::string> parameter_names() const = 0;

    struct Eval {
        double log_post = -std::numeric_limits<double>::infinity();
        double sum_squares = 0.0; // residual sum S for the Gibbs conditional
        bool model_ok = true;     // false when the forward model failed
    };
    virtual Eval evaluate(const Eigen::VectorXd& rho, double sigma2) const = 0;

    /// Recomposes the log posterior for a new sigma2 reusing a stored residual
    /// sum (no forward solve). Targets without a noise model return the
    /// sigma2-independent value.
    virtual double log_post_for_sigma(const Eigen::VectorXd& rho, double sum_squares,
                                      double sigma2) const = 0;

    virtual bool has_noise_model() const = 0;
    virtual const NoiseModel* noise() const { return nullptr; }
    virtual double observation_count() const { return 0.0; } // m*d

    /// Overdispersed starting point (prior draw / init box draw).
    virtual Eigen::VectorXd draw_start(RngStream& rng) const = 0;
    /// Per-parameter sampling-space spans, used to scale the initial proposal.
    virtual Eigen::VectorXd sampling_ranges() const = 0;
    virtual double initial_sigma2() const { return 1.0; }
};

struct LogLikelihood {
    double value = 0.0;
    double sum_squares = 0.0;
    bool model_ok = true;
};

/// Posterior over column-model parameters: Gaussian iid noise likelihood,
/// uniform priors in the original space, inverse-gamma prior on sigma2 and
/// the exp-transform Jacobian for log-scaled parameters.
class MechanisticTarget final : public TargetDensity {
public:
    MechanisticTarget(ColumnSystem model, std::vector<ParameterSpec> specs,
                      Observations observations, double alpha0 = 0.5,
                      double beta0 = 0.0 /* 0 -> 0.5 * sigma0^2 at prior midpoint */);

    int dim() const override { return static_cast<int>(specs_.size()); }
    std::vector<std::string> parameter_names() const override;
    Eval evaluate(const Eigen::VectorXd& rho, double sigma2) const override;
    double log_post_for_sigma(const Eigen::VectorXd& rho, double sum_squares,
                              double sigma2) const override;
    bool has_noise_model() const override { return true; }
    const NoiseModel* noise() const override { return &noise_; }
    double observation_count() const override {
        return static_cast<double>(observations_.count());
    }
    Eigen::VectorXd draw_start(RngStream& rng) const override;
    Eigen::VectorXd sampling_ranges() const override;
    double initial_sigma2() const override { return noise_.sigma2_init; }

    /// Forward solve at original-space parameters eta.
    LogLikelihood log_likelihood(const Eigen::VectorXd& eta, double sigma2) const;
    /// Residual variance estimate S(eta0) / (md - n).
    double sample_variance_estimate(const Eigen::VectorXd& eta0) const;
    bool in_support(const Eigen::VectorXd& rho) const;
    const std::vector<ParameterSpec>& specs() const { return specs_; }
    Eigen::VectorXd to_original(const Eigen::VectorXd& rho) const;

private:
    bool forward(const Eigen::VectorXd& eta, Eigen::MatrixXd& prediction) const;
    double residual_sum(const Eigen::MatrixXd& prediction) const;

    ColumnSystem model_;
    std::vector<ParameterSpec> specs_;
    std::vector<std::vector<FieldRef>> field_refs_;
    Observations observations_;
    NoiseModel noise_;
};

/// Analytic weighted Gaussian mixture target for diagnostics testing, with an
/// explicit start box for overdispersed initialization.
class GaussianMixtureTarget final : public TargetDensity {
public:
    struct Mode {
        double weight = 1.0;
        Eigen::VectorXd mean;
        Eigen::MatrixXd covariance;
    };

    GaussianMixtureTarget(std::vector<Mode> modes, Eigen::VectorXd box_lower,
                          Eigen::VectorXd box_upper,
                          std::vector<std::string> names = {});

    int dim() const override { return static_cast<int>(box_lower_.size()); }
    std::vector<std::string> parameter_names() const override { return names_; }
    Eval evaluate(const Eigen::VectorXd& rho, double sigma2) const override;
    double log_post_for_sigma(const Eigen::VectorXd& rho, double, double) const override;
    bool has_noise_model() const override { return false; }
    Eigen::VectorXd draw_start(RngStream& rng) const override;
    Eigen::VectorXd sampling_ranges() const override;
    double log_density(const Eigen::VectorXd& x) const;
    const std::vector<Mode>& modes() const { return modes_; }

private:
    std::vector<Mode> modes_;
    std::vector<Eigen::LLT<Eigen::MatrixXd>> cholesky_;
    std::vector<double> log_norm_; // log w_j - (n/2)log(2pi) - 0.5 log det C_j
    Eigen::VectorXd box_lower_, box_upper_;
    std::vector<std::string> names_;
};

/// Variance estimate at a point (Eq-style: residual SSQ over md - n dof).
double sample_variance_from_residual(double sum_squares, double md, int n_params);

} // namespace elute
