#include "elute/posterior.hpp"

#include "elute/csv.hpp"
#include "elute/errors.hpp"

#include <cmath>
#include <numbers>

namespace elute {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;
} // namespace

void ParameterSpec::validate() const {
    if (name.empty()) {
        throw ConfigError("parameter spec needs a name");
    }
    if (!(lower < upper)) {
        throw ConfigError("parameter '" + name + "': lower bound must be below upper bound");
    }
    if (transform == Transform::logarithmic && !(lower > 0.0)) {
        throw ConfigError("parameter '" + name + "': log transform requires positive bounds");
    }
    if (paths.empty()) {
        throw ConfigError("parameter '" + name + "': needs at least one model path");
    }
}

double ParameterSpec::to_sampling(double eta) const {
    return transform == Transform::logarithmic ? std::log(eta) : eta;
}

double ParameterSpec::from_sampling(double rho) const {
    return transform == Transform::logarithmic ? std::exp(rho) : rho;
}

Observations load_observations(const std::string& path, int model_components) {
    const CsvTable table = read_csv(path);
    const int time_col = table.column("time_s");
    if (time_col < 0) {
        throw SchemaError("observations file " + path + " lacks a time_s column");
    }
    Observations obs;
    for (size_t c = 0; c < table.header.size(); ++c) {
        const std::string& h = table.header[c];
        if (h.rfind("component_", 0) == 0) {
            const int idx = std::stoi(h.substr(10));
            if (idx < 0 || idx >= model_components) {
                throw SchemaError("observations column " + h
                                  + " has no matching model component");
            }
            obs.components.push_back(idx);
        }
    }
    if (obs.components.empty()) {
        throw SchemaError("observations file " + path + " has no component_<i> columns");
    }
    obs.values.resize(table.rows.size(), obs.components.size());
    obs.times.reserve(table.rows.size());
    for (size_t r = 0; r < table.rows.size(); ++r) {
        obs.times.push_back(table.rows[r][time_col]);
        int k = 0;
        for (size_t c = 0; c < table.header.size(); ++c) {
            if (table.header[c].rfind("component_", 0) == 0) {
                const double v = table.rows[r][c];
                if (!std::isfinite(v)) {
                    throw SchemaError("non-finite observation in " + path);
                }
                obs.values(r, k++) = v;
            }
        }
    }
    if (obs.times.size() < 1) {
        throw SchemaError("observations file " + path + " has no rows");
    }
    return obs;
}

// ---------------------------------------------------------------------------
// MechanisticTarget

MechanisticTarget::MechanisticTarget(ColumnSystem model, std::vector<ParameterSpec> specs,
                                     Observations observations, double alpha0, double beta0)
    : model_(std::move(model)), specs_(std::move(specs)),
      observations_(std::move(observations)) {
    if (specs_.empty()) {
        throw ConfigError("mechanistic target needs at least one parameter");
    }
    for (const auto& spec : specs_) {
        spec.validate();
        std::vector<FieldRef> refs;
        for (const auto& p : spec.paths) {
            refs.push_back(resolve_field(model_, p));
        }
        field_refs_.push_back(std::move(refs));
    }
    model_.output_times = observations_.times;

    if (static_cast<double>(observations_.count()) <= static_cast<double>(dim())) {
        throw DegreesOfFreedomError("observation count m*d must exceed parameter count");
    }

    noise_.alpha0 = alpha0;
    if (!(alpha0 > 0.0)) {
        throw ConfigError("noise prior alpha0 must be positive");
    }
    if (beta0 > 0.0) {
        noise_.beta0 = beta0;
        noise_.sigma2_init = beta0 / alpha0;
    } else {
        // Residual variance at the prior-bound midpoint (sampling space).
        Eigen::VectorXd mid(dim());
        for (int i = 0; i < dim(); ++i) {
            mid[i] = 0.5 * (specs_[i].sampling_lower() + specs_[i].sampling_upper());
        }
        Eigen::VectorXd eta(dim());
        for (int i = 0; i < dim(); ++i) {
            eta[i] = specs_[i].from_sampling(mid[i]);
        }
        const double sigma0sq = sample_variance_estimate(eta);
        if (!(sigma0sq > 0.0)) {
            throw ConfigError("prior-midpoint variance estimate is zero; provide beta0");
        }
        noise_.beta0 = 0.5 * sigma0sq;
        noise_.sigma2_init = sigma0sq;
    }
}

std::vector<std::string> MechanisticTarget::parameter_names() const {
    std::vector<std::string> names;
    names.reserve(specs_.size());
    for (const auto& s : specs_) {
        names.push_back(s.name);
    }
    return names;
}

bool MechanisticTarget::in_support(const Eigen::VectorXd& rho) const {
    for (int i = 0; i < dim(); ++i) {
        if (!std::isfinite(rho[i]) || rho[i] < specs_[i].sampling_lower()
            || rho[i] > specs_[i].sampling_upper()) {
            return false;
        }
    }
    return true;
}

Eigen::VectorXd MechanisticTarget::to_original(const Eigen::VectorXd& rho) const {
    Eigen::VectorXd eta(dim());
    for (int i = 0; i < dim(); ++i) {
        eta[i] = specs_[i].from_sampling(rho[i]);
    }
    return eta;
}

bool MechanisticTarget::forward(const Eigen::VectorXd& eta, Eigen::MatrixXd& prediction) const {
    ColumnSystem model = model_;
    for (int i = 0; i < dim(); ++i) {
        for (const auto& ref : field_refs_[i]) {
            apply_field(model, ref, eta[i]);
        }
    }
    try {
        const SystemResult result = simulate_system(model);
        prediction.resize(observations_.rows(), observations_.comps());
        for (long r = 0; r < observations_.rows(); ++r) {
            for (long c = 0; c < observations_.comps(); ++c) {
                prediction(r, c) =
                    result.chromatogram.concentrations(r, observations_.components[c]);
            }
        }
        return prediction.allFinite();
    } catch (const NumericsError&) {
        return false;
    } catch (const ConfigError&) {
        // Pathological proposal (e.g. porosity driven against a bound).
        return false;
    }
}

double MechanisticTarget::residual_sum(const Eigen::MatrixXd& prediction) const {
    return (observations_.values - prediction).squaredNorm();
}

LogLikelihood MechanisticTarget::log_likelihood(const Eigen::VectorXd& eta,
                                                double sigma2) const {
    LogLikelihood out;
    Eigen::MatrixXd prediction;
    if (!forward(eta, prediction)) {
        out.model_ok = false;
        out.value = kNegInf;
        return out;
    }
    out.sum_squares = residual_sum(prediction);
    const double md = static_cast<double>(observations_.count());
    out.value = -0.5 * md * std::log(2.0 * std::numbers::pi * sigma2)
        - out.sum_squares / (2.0 * sigma2);
    return out;
}

double MechanisticTarget::sample_variance_estimate(const Eigen::VectorXd& eta0) const {
    const double md = static_cast<double>(observations_.count());
    if (md <= static_cast<double>(dim())) {
        throw DegreesOfFreedomError("sample variance estimate needs m*d > n");
    }
    Eigen::MatrixXd prediction;
    if (!forward(eta0, prediction)) {
        throw NumericsError("forward model failed at the variance estimation point");
    }
    return residual_sum(prediction) / (md - static_cast<double>(dim()));
}

double sample_variance_from_residual(double sum_squares, double md, int n_params) {
    if (md <= static_cast<double>(n_params)) {
        throw DegreesOfFreedomError("sample variance estimate needs m*d > n");
    }
    return sum_squares / (md - static_cast<double>(n_params));
}

double MechanisticTarget::log_post_for_sigma(const Eigen::VectorXd& rho, double sum_squares,
                                             double sigma2) const {
    if (!(sigma2 > 0.0)) {
        return kNegInf;
    }
    const double md = static_cast<double>(observations_.count());
    double lp = -0.5 * md * std::log(2.0 * std::numbers::pi * sigma2)
        - sum_squares / (2.0 * sigma2);
    // Inverse-gamma prior on sigma2.
    lp += -(noise_.alpha0 + 1.0) * std::log(sigma2) - noise_.beta0 / sigma2;
    // Flat prior over the bounded original space plus the change-of-variables
    // term for log-transformed coordinates.
    for (int i = 0; i < dim(); ++i) {
        if (specs_[i].transform == Transform::logarithmic) {
            lp += rho[i];
        }
    }
    return lp;
}

TargetDensity::Eval MechanisticTarget::evaluate(const Eigen::VectorXd& rho,
                                                double sigma2) const {
    Eval eval;
    if (!in_support(rho) || !(sigma2 > 0.0)) {
        eval.log_post = kNegInf;
        return eval;
    }
    Eigen::MatrixXd prediction;
    if (!forward(to_original(rho), prediction)) {
        eval.model_ok = false;
        eval.log_post = kNegInf;
        return eval;
    }
    eval.sum_squares = residual_sum(prediction);
    eval.log_post = log_post_for_sigma(rho, eval.sum_squares, sigma2);
    return eval;
}

Eigen::VectorXd MechanisticTarget::draw_start(RngStream& rng) const {
    Eigen::VectorXd rho(dim());
    for (int i = 0; i < dim(); ++i) {
        rho[i] = rng.uniform(specs_[i].sampling_lower(), specs_[i].sampling_upper());
    }
    return rho;
}

Eigen::VectorXd MechanisticTarget::sampling_ranges() const {
    Eigen::VectorXd r(dim());
    for (int i = 0; i < dim(); ++i) {
        r[i] = specs_[i].sampling_upper() - specs_[i].sampling_lower();
    }
    return r;
}

// ---------------------------------------------------------------------------
// GaussianMixtureTarget

GaussianMixtureTarget::GaussianMixtureTarget(std::vector<Mode> modes,
                                             Eigen::VectorXd box_lower,
                                             Eigen::VectorXd box_upper,
                                             std::vector<std::string> names)
    : modes_(std::move(modes)), box_lower_(std::move(box_lower)),
      box_upper_(std::move(box_upper)), names_(std::move(names)) {
    if (modes_.empty()) {
        throw ConfigError("mixture target needs at least one mode");
    }
    const auto n = modes_.front().mean.size();
    if (box_lower_.size() != n || box_upper_.size() != n) {
        throw ConfigError("mixture start box dimension mismatch");
    }
    double total_weight = 0.0;
    for (const auto& mode : modes_) {
        if (mode.mean.size() != n || mode.covariance.rows() != n
            || mode.covariance.cols() != n) {
            throw ConfigError("mixture mode dimension mismatch");
        }
        if (!(mode.weight > 0.0)) {
            throw ConfigError("mixture weights must be positive");
        }
        if (!mode.covariance.isApprox(mode.covariance.transpose(), 1e-12)) {
            throw ConfigError("mixture covariance must be symmetric");
        }
        total_weight += mode.weight;
    }
    for (auto& mode : modes_) {
        mode.weight /= total_weight;
        Eigen::LLT<Eigen::MatrixXd> llt(mode.covariance);
        if (llt.info() != Eigen::Success) {
            throw ConfigError("mixture covariance must be positive definite");
        }
        double log_det = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            log_det += 2.0 * std::log(llt.matrixL()(i, i));
        }
        log_norm_.push_back(std::log(mode.weight) - 0.5 * (n * kLog2Pi + log_det));
        cholesky_.push_back(std::move(llt));
    }
    if (names_.empty()) {
        for (Eigen::Index i = 0; i < n; ++i) {
            names_.push_back("x" + std::to_string(i));
        }
    }
}

double GaussianMixtureTarget::log_density(const Eigen::VectorXd& x) const {
    double best = kNegInf;
    std::vector<double> terms(modes_.size());
    for (size_t j = 0; j < modes_.size(); ++j) {
        const Eigen::VectorXd d = x - modes_[j].mean;
        const Eigen::VectorXd z = cholesky_[j].matrixL().solve(d);
        terms[j] = log_norm_[j] - 0.5 * z.squaredNorm();
        best = std::max(best, terms[j]);
    }
    if (!std::isfinite(best)) {
        return kNegInf;
    }
    double acc = 0.0;
    for (const double t : terms) {
        acc += std::exp(t - best);
    }
    return best + std::log(acc);
}

TargetDensity::Eval GaussianMixtureTarget::evaluate(const Eigen::VectorXd& rho,
                                                    double /*sigma2*/) const {
    Eval eval;
    eval.log_post = log_density(rho);
    return eval;
}

double GaussianMixtureTarget::log_post_for_sigma(const Eigen::VectorXd& rho, double,
                                                 double) const {
    return log_density(rho);
}

Eigen::VectorXd GaussianMixtureTarget::draw_start(RngStream& rng) const {
    Eigen::VectorXd x(dim());
    for (int i = 0; i < dim(); ++i) {
        x[i] = rng.uniform(box_lower_[i], box_upper_[i]);
    }
    return x;
}

Eigen::VectorXd GaussianMixtureTarget::sampling_ranges() const {
    return box_upper_ - box_lower_;
}

} // namespace elute
