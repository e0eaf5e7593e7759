#pragma once

#include "elute/integrator.hpp"
#include "elute/sma.hpp"
#include "elute/units.hpp"

#include <Eigen/Dense>

#include <optional>

namespace elute {

struct GrmParams {
    double length = 0.0;                // m
    double particle_radius = 0.0;       // m
    double col_porosity = 0.0;          // -
    double particle_porosity = 0.0;     // -
    double interstitial_velocity = 0.0; // m/s, Q / (A eps_c)
    double dispersion = 0.0;            // m^2/s
    Eigen::VectorXd film;               // m/s per component
    Eigen::VectorXd pore_diffusion;     // m^2/s per component
    Eigen::VectorXd surface_diffusion;  // m^2/s per component (default 0)

    void validate(int n_comp) const;
};

/// Indexing of the method-of-lines state vector for one column:
/// per axial cell j: bulk concentrations (n_comp), then for each radial shell
/// pore concentrations (n_comp) followed by protein loadings (m when binding
/// is active). Outflow integrals per component are appended at the tail.
struct GrmLayout {
    int n_comp = 0;
    int proteins = 0;
    int cells = 0;
    int shells = 0;

    int shell_stride() const { return n_comp + proteins; }
    int cell_stride() const { return n_comp + shells * shell_stride(); }
    int bulk(int j, int i) const { return j * cell_stride() + i; }
    int pore(int j, int l, int i) const {
        return j * cell_stride() + n_comp + l * shell_stride() + i;
    }
    int bound(int j, int l, int i_protein) const {
        return pore(j, l, n_comp) + i_protein;
    }
    int outflow(int i) const { return cells * cell_stride() + i; }
    int size() const { return cells * cell_stride() + n_comp; }
};

struct GrmOutput : UnitOutput {
    GrmLayout layout;
};

GrmOutput simulate_grm(const GrmParams& params, const std::optional<SmaParams>& binding,
                       double flow_rate, int n_comp, const Discretization& disc,
                       const InletFn& inlet, const std::vector<double>& record_times,
                       const std::vector<double>& breakpoints = {},
                       const StepCallback& on_accepted_step = nullptr);

} // namespace elute
