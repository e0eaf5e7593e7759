#pragma once

#include <Eigen/Dense>

namespace elute {

/// Steric mass-action ion-exchange binding. Component 0 is salt; the m
/// protein components carry kinetic rates ka/kd (keq = ka/kd), characteristic
/// charge nu and steric shielding factor. Quasi-stationary binding scales
/// both rates by qs_rate_scale so the dynamic form relaxes to the algebraic
/// isotherm within one integrator step.
struct SmaParams {
    enum class Mode { dynamic_binding, quasi_stationary };

    Mode mode = Mode::dynamic_binding;
    Eigen::VectorXd ka;
    Eigen::VectorXd kd;
    Eigen::VectorXd nu;
    Eigen::VectorXd steric;
    double capacity = 0.0; // ionic capacity, mol/m^3
    double qs_rate_scale = 1e4;

    int proteins() const { return static_cast<int>(ka.size()); }
    double rate_scale() const {
        return mode == Mode::quasi_stationary ? qs_rate_scale : 1.0;
    }
    void validate() const;
};

/// Salt capacity available for binding: capacity - sum (nu_j + steric_j) q_j.
double sma_available_salt(const SmaParams& params, const double* q);

/// Salt bound on the resin under electroneutrality: capacity - sum nu_j q_j.
double sma_bound_salt(const SmaParams& params, const double* q);

/// dq/dt = ka_i cp_i qbar0^nu_i - kd_i q_i cp0^nu_i for each protein.
/// cp holds pore-phase concentrations (salt first), q the protein loadings.
/// Returns false when the available salt capacity is negative (domain
/// violation; the integrator rejects the step).
bool sma_rate(const SmaParams& params, const double* cp, const double* q, double* rate);

/// Partial derivatives of sma_rate: d_dcp is m x (m+1) (salt column first),
/// d_dq is m x m.
void sma_rate_jacobian(const SmaParams& params, const double* cp, const double* q,
                       Eigen::MatrixXd& d_dcp, Eigen::MatrixXd& d_dq);

/// Titration-based ionic capacity: c_in_salt * v_titration / ((1 - total_porosity) * v_column).
double ionic_capacity(double c_in_salt, double v_titration, double v_column,
                      double total_porosity);

/// Algebraic single-protein equilibrium loading q solving
/// q = keq * cp * (qbar0(q) / cp_salt)^nu by bisection.
double sma_equilibrium_single(const SmaParams& params, double cp_salt, double cp_protein);

} // namespace elute
