#pragma once

#include "elute/integrator.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace elute {

/// Time-dependent boundary concentrations feeding a unit (n_comp values).
using InletFn = std::function<void(double t, double* c)>;

struct CstrParams {
    double volume = 0.0;    // m^3
    double flow_rate = 0.0; // m^3/s
};

struct DpfrParams {
    double length = 0.0;     // m
    double dispersion = 0.0; // m^2/s
    double velocity = 0.0;   // m/s, Q / (pi r_t^2)
};

struct Discretization {
    int axial_cells = 100;
    int radial_shells = 10;
    double rel_tol = 1e-6;
    double abs_tol = 1e-8;
};

struct UnitOutput {
    Eigen::MatrixXd outlet;           // record times x components
    Eigen::VectorXd outflow_integral; // integral of c_out dt per component, s*mol/m^3
    Eigen::VectorXd held;             // amount inside the unit at t_end, mol
    std::vector<std::string> warnings;
    Eigen::VectorXd final_state;
};

UnitOutput simulate_cstr(const CstrParams& params, int n_comp, const InletFn& inlet,
                         const std::vector<double>& record_times, const OdeOptions& options,
                         const std::vector<double>& breakpoints = {},
                         const Eigen::VectorXd* initial = nullptr);

/// Finite-volume advection-dispersion with Danckwerts inlet (total inlet flux
/// = u c_in) and zero outlet gradient. Van Leer limited second-order upwind
/// faces; the Jacobian uses the first-order part.
UnitOutput simulate_dpfr(const DpfrParams& params, double flow_rate, int n_comp, int cells,
                         const InletFn& inlet, const std::vector<double>& record_times,
                         const OdeOptions& options, const std::vector<double>& breakpoints = {});

/// Van Leer flux limiter on the slope ratio.
inline double van_leer(double r) {
    const double a = std::abs(r);
    return (r + a) / (1.0 + a);
}

} // namespace elute
