#pragma once

#include "elute/grm.hpp"
#include "elute/inlet.hpp"
#include "elute/sma.hpp"
#include "elute/units.hpp"

#include <optional>
#include <string>
#include <vector>

namespace elute {

/// Binding block as configured; materialized into SmaParams at build time so
/// estimated keq values map onto ka = keq * kinetic_rate.
struct SmaConfig {
    SmaParams::Mode mode = SmaParams::Mode::dynamic_binding;
    bool via_keq = false;
    Eigen::VectorXd keq;
    double kinetic_rate = 1.0; // kd when parameterized through keq
    Eigen::VectorXd ka, kd;
    Eigen::VectorXd nu, steric;
    double capacity = 0.0;
    double qs_rate_scale = 1e4;

    SmaParams build() const;
};

struct DpfrUnitConfig {
    double length = 0.0;
    double dispersion = 0.0;
    double tubing_radius = 0.0;
};

struct GrmUnitConfig {
    double length = 0.0;
    double diameter = 0.0;
    double particle_radius = 0.0;
    double col_porosity = 0.0;
    double particle_porosity = 0.0;
    double dispersion = 0.0;
    Eigen::VectorXd film;
    Eigen::VectorXd pore_diffusion;
    Eigen::VectorXd surface_diffusion;
    std::optional<SmaConfig> binding;

    GrmParams build(double flow_rate) const;
};

struct UnitConfig {
    enum class Type { cstr, dpfr, grm, bypass };
    Type type = Type::bypass;
    CstrParams cstr;
    DpfrUnitConfig dpfr;
    GrmUnitConfig grm;
};

/// Injector-to-detector train in flow order, units coupled outlet-to-inlet.
struct ColumnSystem {
    int n_components = 1;
    double flow_rate = 0.0;
    std::vector<UnitConfig> units;
    InletProfile inlet;
    Discretization disc;
    int dpfr_cells = 100;
    int coupling_points = 0; // 0 -> derived from the output grid
    std::vector<double> output_times;
};

struct Chromatogram {
    std::vector<double> times;
    Eigen::MatrixXd concentrations; // times x components
};

struct MassBalance {
    Eigen::VectorXd injected; // mol per component over [0, t_end]
    Eigen::VectorXd eluted;
    Eigen::VectorXd held;
};

struct SystemResult {
    Chromatogram chromatogram;
    MassBalance balance;
    std::vector<std::string> warnings;
};

SystemResult simulate_system(const ColumnSystem& system);
SystemResult simulate_system(const ColumnSystem& system,
                             const std::vector<double>& output_times);

} // namespace elute
