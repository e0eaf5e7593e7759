#include "elute/system.hpp"

#include "elute/errors.hpp"
#include "elute/interp.hpp"

#include <cmath>
#include <memory>
#include <numbers>

namespace elute {

SmaParams SmaConfig::build() const {
    SmaParams p;
    p.mode = mode;
    p.nu = nu;
    p.steric = steric;
    p.capacity = capacity;
    p.qs_rate_scale = qs_rate_scale;
    if (via_keq) {
        p.kd = Eigen::VectorXd::Constant(keq.size(), kinetic_rate);
        p.ka = keq * kinetic_rate;
    } else {
        p.ka = ka;
        p.kd = kd;
    }
    return p;
}

GrmParams GrmUnitConfig::build(double flow_rate) const {
    GrmParams p;
    p.length = length;
    p.particle_radius = particle_radius;
    p.col_porosity = col_porosity;
    p.particle_porosity = particle_porosity;
    p.dispersion = dispersion;
    p.film = film;
    p.pore_diffusion = pore_diffusion;
    p.surface_diffusion = surface_diffusion;
    const double area = std::numbers::pi * diameter * diameter / 4.0;
    if (!(area > 0.0) || !(col_porosity > 0.0)) {
        throw ConfigError("GRM diameter and column porosity must be positive");
    }
    p.interstitial_velocity = flow_rate / (area * col_porosity);
    return p;
}

namespace {

std::vector<double> uniform_grid(double t_end, int points) {
    std::vector<double> g(points);
    for (int i = 0; i < points; ++i) {
        g[i] = t_end * static_cast<double>(i) / (points - 1);
    }
    return g;
}

struct StageInterpolants {
    std::vector<PchipInterpolant> per_component;
};

} // namespace

SystemResult simulate_system(const ColumnSystem& system) {
    return simulate_system(system, system.output_times);
}

SystemResult simulate_system(const ColumnSystem& system,
                             const std::vector<double>& output_times) {
    if (output_times.size() < 2) {
        throw ConfigError("system simulation needs an output grid with >= 2 points");
    }
    if (system.inlet.n_components() != system.n_components) {
        throw ConfigError("inlet profile component count must match the system");
    }
    const double t_end = output_times.back();
    const int n_comp = system.n_components;
    const double flow = system.flow_rate;
    if (!(flow > 0.0)) {
        throw ConfigError("flow_rate must be positive");
    }

    int coupling = system.coupling_points;
    if (coupling <= 1) {
        coupling = std::max<int>(801, static_cast<int>(4 * output_times.size()) + 1);
    }
    const std::vector<double> grid = uniform_grid(t_end, coupling);
    const std::vector<double> breakpoints = system.inlet.boundaries();

    OdeOptions options;
    options.rel_tol = system.disc.rel_tol;
    options.abs_tol = system.disc.abs_tol;

    SystemResult result;
    result.balance.injected = flow * system.inlet.integral(t_end);
    result.balance.held = Eigen::VectorXd::Zero(n_comp);
    result.balance.eluted = Eigen::VectorXd::Zero(n_comp);

    const InletProfile& profile = system.inlet;
    InletFn inlet = [&profile](double t, double* c) { profile.eval(t, c); };
    // Keep interpolants of intermediate outlets alive for downstream lambdas.
    std::vector<std::shared_ptr<StageInterpolants>> stages;
    Eigen::VectorXd last_outflow = flow * profile.integral(t_end);

    for (size_t u = 0; u < system.units.size(); ++u) {
        const UnitConfig& unit = system.units[u];
        const std::string where = "unit " + std::to_string(u);
        UnitOutput out;
        try {
            switch (unit.type) {
            case UnitConfig::Type::bypass:
                continue; // identity: forward the inlet unchanged
            case UnitConfig::Type::cstr:
                out = simulate_cstr(unit.cstr, n_comp, inlet, grid, options, breakpoints);
                break;
            case UnitConfig::Type::dpfr: {
                DpfrParams p;
                p.length = unit.dpfr.length;
                p.dispersion = unit.dpfr.dispersion;
                const double area =
                    std::numbers::pi * unit.dpfr.tubing_radius * unit.dpfr.tubing_radius;
                if (!(area > 0.0)) {
                    throw ConfigError("DPFR tubing radius must be positive");
                }
                p.velocity = flow / area;
                out = simulate_dpfr(p, flow, n_comp, system.dpfr_cells, inlet, grid, options,
                                    breakpoints);
                break;
            }
            case UnitConfig::Type::grm: {
                const GrmParams p = unit.grm.build(flow);
                std::optional<SmaParams> binding;
                if (unit.grm.binding) {
                    binding = unit.grm.binding->build();
                }
                out = simulate_grm(p, binding, flow, n_comp, system.disc, inlet, grid,
                                   breakpoints);
                break;
            }
            }
        } catch (const NumericsError& e) {
            throw NumericsError(where + ": " + e.what(), e.failure_time);
        } catch (const ConfigError& e) {
            throw ConfigError(where + ": " + e.what());
        }

        for (const auto& w : out.warnings) {
            result.warnings.push_back(where + ": " + w);
        }
        result.balance.held += out.held;
        last_outflow = flow * out.outflow_integral;

        auto stage = std::make_shared<StageInterpolants>();
        stage->per_component.reserve(n_comp);
        for (int i = 0; i < n_comp; ++i) {
            std::vector<double> values(grid.size());
            for (size_t r = 0; r < grid.size(); ++r) {
                values[r] = out.outlet(r, i);
            }
            stage->per_component.emplace_back(grid, std::move(values));
        }
        stages.push_back(stage);
        inlet = [stage, n_comp](double t, double* c) {
            for (int i = 0; i < n_comp; ++i) {
                c[i] = stage->per_component[i](t);
            }
        };
    }

    result.balance.eluted = last_outflow;

    // Detector reading on the requested grid.
    result.chromatogram.times = output_times;
    result.chromatogram.concentrations.resize(output_times.size(), n_comp);
    Eigen::VectorXd c(n_comp);
    for (size_t r = 0; r < output_times.size(); ++r) {
        inlet(output_times[r], c.data());
        for (int i = 0; i < n_comp; ++i) {
            if (!std::isfinite(c[i])) {
                throw NumericsError("non-finite chromatogram value", output_times[r]);
            }
            result.chromatogram.concentrations(r, i) = c[i];
        }
    }
    return result;
}

} // namespace elute
