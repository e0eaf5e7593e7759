#include "elute/sma.hpp"

#include "elute/errors.hpp"

#include <cmath>

namespace elute {

namespace {
// Relative slack below zero tolerated before a step counts as a domain
// violation; values inside the slack are clamped.
constexpr double kCapacitySlack = 1e-10;
} // namespace

void SmaParams::validate() const {
    const auto m = ka.size();
    if (m < 1) {
        throw ConfigError("SMA binding needs at least one protein component");
    }
    if (kd.size() != m || nu.size() != m || steric.size() != m) {
        throw ConfigError("SMA parameter vectors must have equal length");
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        if (!(ka[i] > 0.0) || !(kd[i] > 0.0)) {
            throw ConfigError("SMA binding rates must be positive");
        }
        if (!(nu[i] > 0.0) || steric[i] < 0.0) {
            throw ConfigError("SMA charge must be positive and steric factor non-negative");
        }
    }
    if (!(capacity > 0.0)) {
        throw ConfigError("SMA ionic capacity must be positive");
    }
    if (!(qs_rate_scale > 0.0)) {
        throw ConfigError("SMA quasi-stationary rate scale must be positive");
    }
}

double sma_available_salt(const SmaParams& params, const double* q) {
    double qbar = params.capacity;
    for (int j = 0; j < params.proteins(); ++j) {
        qbar -= (params.nu[j] + params.steric[j]) * q[j];
    }
    return qbar;
}

double sma_bound_salt(const SmaParams& params, const double* q) {
    double q0 = params.capacity;
    for (int j = 0; j < params.proteins(); ++j) {
        q0 -= params.nu[j] * q[j];
    }
    return q0;
}

bool sma_rate(const SmaParams& params, const double* cp, const double* q, double* rate) {
    double qbar = sma_available_salt(params, q);
    if (qbar < -kCapacitySlack * params.capacity) {
        return false;
    }
    qbar = std::max(qbar, 0.0);
    const double salt = std::max(cp[0], 0.0);
    const double scale = params.rate_scale();
    for (int i = 0; i < params.proteins(); ++i) {
        const double adsorb = params.ka[i] * cp[1 + i] * std::pow(qbar, params.nu[i]);
        const double desorb = params.kd[i] * q[i] * std::pow(salt, params.nu[i]);
        rate[i] = scale * (adsorb - desorb);
        if (!std::isfinite(rate[i])) {
            return false;
        }
    }
    return true;
}

void sma_rate_jacobian(const SmaParams& params, const double* cp, const double* q,
                       Eigen::MatrixXd& d_dcp, Eigen::MatrixXd& d_dq) {
    const int m = params.proteins();
    d_dcp.setZero(m, m + 1);
    d_dq.setZero(m, m);
    const double qbar = std::max(sma_available_salt(params, q), 0.0);
    const double salt = std::max(cp[0], 0.0);
    const double scale = params.rate_scale();
    for (int i = 0; i < m; ++i) {
        const double nu_i = params.nu[i];
        const double qbar_pow = std::pow(qbar, nu_i);
        const double salt_pow = std::pow(salt, nu_i);
        const double qbar_pow_dm = qbar > 0.0 ? nu_i * std::pow(qbar, nu_i - 1.0) : 0.0;
        const double salt_pow_dm = salt > 0.0 ? nu_i * std::pow(salt, nu_i - 1.0) : 0.0;
        d_dcp(i, 0) = -scale * params.kd[i] * q[i] * salt_pow_dm;
        d_dcp(i, 1 + i) = scale * params.ka[i] * qbar_pow;
        for (int j = 0; j < m; ++j) {
            double v = -params.ka[i] * cp[1 + i] * qbar_pow_dm * (params.nu[j] + params.steric[j]);
            if (j == i) {
                v -= params.kd[i] * salt_pow;
            }
            d_dq(i, j) = scale * v;
        }
    }
}

double ionic_capacity(double c_in_salt, double v_titration, double v_column,
                      double total_porosity) {
    if (total_porosity >= 1.0) {
        throw ConfigError("total porosity must be below 1 for titration capacity");
    }
    return c_in_salt * v_titration / ((1.0 - total_porosity) * v_column);
}

double sma_equilibrium_single(const SmaParams& params, double cp_salt, double cp_protein) {
    if (params.proteins() != 1) {
        throw ConfigError("single-protein equilibrium expects one protein component");
    }
    if (!(cp_salt > 0.0)) {
        throw ConfigError("equilibrium solve needs positive salt concentration");
    }
    const double keq = params.ka[0] / params.kd[0];
    const double nu = params.nu[0];
    const double denom = params.nu[0] + params.steric[0];
    auto residual = [&](double qv) {
        const double qbar = params.capacity - denom * qv;
        return keq * cp_protein * std::pow(qbar / cp_salt, nu) - qv;
    };
    double lo = 0.0, hi = params.capacity / denom;
    if (residual(lo) <= 0.0) {
        return 0.0;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (residual(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace elute
