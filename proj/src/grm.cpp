#include "elute/grm.hpp"

#include "elute/errors.hpp"

#include <cmath>

namespace elute {

void GrmParams::validate(int n_comp) const {
    if (!(length > 0.0) || !(particle_radius > 0.0)) {
        throw ConfigError("GRM length and particle radius must be positive");
    }
    if (!(col_porosity > 0.0) || !(col_porosity < 1.0) || !(particle_porosity > 0.0)
        || !(particle_porosity < 1.0)) {
        throw ConfigError("GRM porosities must lie strictly between 0 and 1");
    }
    if (!(interstitial_velocity > 0.0) || dispersion < 0.0) {
        throw ConfigError("GRM needs positive velocity and non-negative dispersion");
    }
    if (film.size() != n_comp || pore_diffusion.size() != n_comp
        || (surface_diffusion.size() != 0 && surface_diffusion.size() != n_comp)) {
        throw ConfigError("GRM transport coefficient vectors must match component count");
    }
    if ((film.array() < 0.0).any() || (pore_diffusion.array() < 0.0).any()
        || (surface_diffusion.size() > 0 && (surface_diffusion.array() < 0.0).any())) {
        throw ConfigError("GRM transport coefficients must be non-negative");
    }
}

namespace {

class GrmSystem final : public OdeSystem {
public:
    GrmSystem(const GrmParams& p, const std::optional<SmaParams>& binding, int n_comp,
              const Discretization& disc, const InletFn& inlet)
        : p_(p), binding_(binding), inlet_(inlet) {
        layout_.n_comp = n_comp;
        layout_.proteins = binding ? binding->proteins() : 0;
        layout_.cells = disc.axial_cells;
        layout_.shells = disc.radial_shells;
        dz_ = p.length / layout_.cells;
        dr_ = p.particle_radius / layout_.shells;
        phase_ratio_ = (1.0 - p.col_porosity) / p.col_porosity;
        pore_ratio_ = (1.0 - p.particle_porosity) / p.particle_porosity;

        const int shells = layout_.shells;
        shell_area_.resize(shells + 1);
        shell_volume_.resize(shells);
        for (int l = 0; l <= shells; ++l) {
            const double r = l * dr_;
            shell_area_[l] = r * r;
        }
        for (int l = 0; l < shells; ++l) {
            const double r0 = l * dr_;
            const double r1 = (l + 1) * dr_;
            shell_volume_[l] = (r1 * r1 * r1 - r0 * r0 * r0) / 3.0;
        }

        // Film conductance in series with diffusion through the outer half shell.
        film_conductance_.resize(n_comp);
        for (int i = 0; i < n_comp; ++i) {
            const double kf = p.film[i];
            const double dp = p.pore_diffusion[i] * p.particle_porosity;
            if (kf <= 0.0 || dp <= 0.0) {
                film_conductance_[i] = 0.0;
            } else {
                film_conductance_[i] = 1.0 / (1.0 / kf + 0.5 * dr_ / dp);
            }
        }

        c_in_.resize(n_comp);
        if (layout_.proteins > 0) {
            rate_.resize(layout_.proteins);
            d_rate_dcp_.resize(layout_.proteins, layout_.proteins + 1);
            d_rate_dq_.resize(layout_.proteins, layout_.proteins);
        }
    }

    const GrmLayout& layout() const { return layout_; }

    int size() const override { return layout_.size(); }

    bool rhs(double t, const double* y, double* dydt) const override {
        const int n = layout_.n_comp;
        const int cells = layout_.cells;
        const int shells = layout_.shells;
        const double u = p_.interstitial_velocity;
        const double dax = p_.dispersion;
        const double surface_per_volume = 3.0 / p_.particle_radius;

        inlet_(t, c_in_.data());

        // Bulk advection-dispersion, component by component.
        for (int i = 0; i < n; ++i) {
            double flux_prev = u * c_in_[i];
            for (int f = 1; f < cells; ++f) {
                const double cm = y[layout_.bulk(f - 1, i)];
                const double cc = y[layout_.bulk(f, i)];
                double face = cm;
                if (f >= 2) {
                    const double dn = cc - cm;
                    const double dp = cm - y[layout_.bulk(f - 2, i)];
                    if (dn != 0.0) {
                        face += 0.5 * van_leer(dp / dn) * dn;
                    }
                }
                const double flux = u * face - dax * (cc - cm) / dz_;
                dydt[layout_.bulk(f - 1, i)] = (flux_prev - flux) / dz_;
                flux_prev = flux;
            }
            const double c_last = y[layout_.bulk(cells - 1, i)];
            dydt[layout_.bulk(cells - 1, i)] = (flux_prev - u * c_last) / dz_;
            dydt[layout_.outflow(i)] = c_last;
        }

        // Particle shells, film exchange and binding.
        for (int j = 0; j < cells; ++j) {
            for (int i = 0; i < n; ++i) {
                const double dp_eff = p_.pore_diffusion[i] * p_.particle_porosity;
                const double ds_eff = layout_.proteins > 0 && i > 0
                        && p_.surface_diffusion.size() > 0
                    ? p_.surface_diffusion[i] * (1.0 - p_.particle_porosity)
                    : 0.0;
                double flux_in = 0.0; // combined-phase flux at the inner face of shell l
                for (int l = 0; l < shells; ++l) {
                    double flux_out;
                    if (l + 1 < shells) {
                        flux_out = dp_eff
                            * (y[layout_.pore(j, l + 1, i)] - y[layout_.pore(j, l, i)]) / dr_;
                        if (ds_eff > 0.0) {
                            flux_out += ds_eff
                                * (y[layout_.bound(j, l + 1, i - 1)]
                                   - y[layout_.bound(j, l, i - 1)])
                                / dr_;
                        }
                    } else {
                        flux_out = film_conductance_[i]
                            * (y[layout_.bulk(j, i)] - y[layout_.pore(j, l, i)]);
                    }
                    dydt[layout_.pore(j, l, i)] =
                        (shell_area_[l + 1] * flux_out - shell_area_[l] * flux_in)
                        / (p_.particle_porosity * shell_volume_[l]);
                    flux_in = flux_out;
                }
                // Film loss from the bulk.
                const double outer_flux = film_conductance_[i]
                    * (y[layout_.bulk(j, i)] - y[layout_.pore(j, shells - 1, i)]);
                dydt[layout_.bulk(j, i)] -= phase_ratio_ * surface_per_volume * outer_flux;
            }

            if (layout_.proteins > 0) {
                for (int l = 0; l < shells; ++l) {
                    const double* cp = y + layout_.pore(j, l, 0);
                    const double* q = y + layout_.bound(j, l, 0);
                    if (!sma_rate(*binding_, cp, q, rate_.data())) {
                        return false;
                    }
                    double salt_release = 0.0;
                    for (int ip = 0; ip < layout_.proteins; ++ip) {
                        dydt[layout_.bound(j, l, ip)] = rate_[ip];
                        dydt[layout_.pore(j, l, 1 + ip)] -= pore_ratio_ * rate_[ip];
                        salt_release += binding_->nu[ip] * rate_[ip];
                    }
                    // Electroneutral counter-ion exchange with the pore liquid.
                    dydt[layout_.pore(j, l, 0)] += pore_ratio_ * salt_release;
                }
            }
        }
        return true;
    }

    void jacobian(double /*t*/, const double* y,
                  std::vector<Eigen::Triplet<double>>& out) const override {
        const int n = layout_.n_comp;
        const int cells = layout_.cells;
        const int shells = layout_.shells;
        const double adv = p_.interstitial_velocity / dz_;
        const double dif = p_.dispersion / (dz_ * dz_);
        const double surface_per_volume = 3.0 / p_.particle_radius;

        for (int i = 0; i < n; ++i) {
            const double keff = film_conductance_[i];
            const double bulk_film = phase_ratio_ * surface_per_volume * keff;
            for (int j = 0; j < cells; ++j) {
                const int row = layout_.bulk(j, i);
                double diag = -adv - bulk_film;
                if (j > 0) {
                    out.emplace_back(row, layout_.bulk(j - 1, i), adv + dif);
                    diag -= dif;
                }
                if (j + 1 < cells) {
                    out.emplace_back(row, layout_.bulk(j + 1, i), dif);
                    diag -= dif;
                }
                out.emplace_back(row, row, diag);
                out.emplace_back(row, layout_.pore(j, shells - 1, i), bulk_film);
            }
            out.emplace_back(layout_.outflow(i), layout_.bulk(cells - 1, i), 1.0);
        }

        for (int j = 0; j < cells; ++j) {
            for (int i = 0; i < n; ++i) {
                const double dp_eff = p_.pore_diffusion[i] * p_.particle_porosity;
                const double keff = film_conductance_[i];
                for (int l = 0; l < shells; ++l) {
                    const int row = layout_.pore(j, l, i);
                    const double inv_vol = 1.0 / (p_.particle_porosity * shell_volume_[l]);
                    double diag = 0.0;
                    if (l > 0) {
                        const double w = shell_area_[l] * dp_eff / dr_ * inv_vol;
                        out.emplace_back(row, layout_.pore(j, l - 1, i), w);
                        diag -= w;
                    }
                    if (l + 1 < shells) {
                        const double w = shell_area_[l + 1] * dp_eff / dr_ * inv_vol;
                        out.emplace_back(row, layout_.pore(j, l + 1, i), w);
                        diag -= w;
                    } else {
                        const double w = shell_area_[shells] * keff * inv_vol;
                        out.emplace_back(row, layout_.bulk(j, i), w);
                        diag -= w;
                    }
                    out.emplace_back(row, row, diag);
                }
            }

            if (layout_.proteins > 0) {
                for (int l = 0; l < shells; ++l) {
                    const double* cp = y + layout_.pore(j, l, 0);
                    const double* q = y + layout_.bound(j, l, 0);
                    sma_rate_jacobian(*binding_, cp, q, d_rate_dcp_, d_rate_dq_);
                    // Entries are emitted unconditionally (zeros included) so
                    // the sparsity pattern is identical on every call.
                    for (int ip = 0; ip < layout_.proteins; ++ip) {
                        const int q_row = layout_.bound(j, l, ip);
                        const int cp_row = layout_.pore(j, l, 1 + ip);
                        for (int k = 0; k <= layout_.proteins; ++k) {
                            const double v = d_rate_dcp_(ip, k);
                            const int col = layout_.pore(j, l, k);
                            out.emplace_back(q_row, col, v);
                            out.emplace_back(cp_row, col, -pore_ratio_ * v);
                        }
                        for (int k = 0; k < layout_.proteins; ++k) {
                            const double v = d_rate_dq_(ip, k);
                            const int col = layout_.bound(j, l, k);
                            out.emplace_back(q_row, col, v);
                            out.emplace_back(cp_row, col, -pore_ratio_ * v);
                        }
                    }
                    // Salt pore concentration picks up the counter-ion exchange.
                    const int salt_row = layout_.pore(j, l, 0);
                    for (int k = 0; k <= layout_.proteins; ++k) {
                        double acc = 0.0;
                        for (int ip = 0; ip < layout_.proteins; ++ip) {
                            acc += binding_->nu[ip] * d_rate_dcp_(ip, k);
                        }
                        out.emplace_back(salt_row, layout_.pore(j, l, k), pore_ratio_ * acc);
                    }
                    for (int k = 0; k < layout_.proteins; ++k) {
                        double acc = 0.0;
                        for (int ip = 0; ip < layout_.proteins; ++ip) {
                            acc += binding_->nu[ip] * d_rate_dq_(ip, k);
                        }
                        out.emplace_back(salt_row, layout_.bound(j, l, k), pore_ratio_ * acc);
                    }
                }
            }
        }
    }

    bool jacobian_constant() const override { return layout_.proteins == 0; }

private:
    GrmParams p_;
    std::optional<SmaParams> binding_;
    const InletFn& inlet_;
    GrmLayout layout_;
    double dz_ = 0.0, dr_ = 0.0;
    double phase_ratio_ = 0.0; // (1-eps_c)/eps_c
    double pore_ratio_ = 0.0;  // (1-eps_p)/eps_p
    std::vector<double> shell_area_, shell_volume_, film_conductance_;
    mutable std::vector<double> c_in_;
    mutable Eigen::VectorXd rate_;
    mutable Eigen::MatrixXd d_rate_dcp_, d_rate_dq_;
};

} // namespace

GrmOutput simulate_grm(const GrmParams& params, const std::optional<SmaParams>& binding,
                       double flow_rate, int n_comp, const Discretization& disc,
                       const InletFn& inlet, const std::vector<double>& record_times,
                       const std::vector<double>& breakpoints,
                       const StepCallback& on_accepted_step) {
    params.validate(n_comp);
    if (binding) {
        binding->validate();
        if (binding->proteins() != n_comp - 1) {
            throw ConfigError("SMA binding expects one protein entry per non-salt component");
        }
    }
    if (disc.axial_cells < 2 || disc.radial_shells < 1) {
        throw ConfigError("GRM discretization needs >= 2 axial cells and >= 1 radial shell");
    }
    if (record_times.empty()) {
        throw ConfigError("GRM simulation needs record times");
    }

    GrmSystem system(params, binding, n_comp, disc, inlet);
    std::vector<double> state(system.size(), 0.0);
    GrmOutput out;
    out.layout = system.layout();
    out.outlet.resize(record_times.size(), n_comp);
    auto record = [&](std::size_t idx, double, const double* y) {
        for (int i = 0; i < n_comp; ++i) {
            out.outlet(idx, i) = y[out.layout.bulk(out.layout.cells - 1, i)];
        }
    };
    OdeOptions options;
    options.rel_tol = disc.rel_tol;
    options.abs_tol = disc.abs_tol;
    const auto result = integrate_stiff(system, state, 0.0, record_times.back(), record_times,
                                        record, options, breakpoints, on_accepted_step);
    if (!result.ok) {
        throw NumericsError("GRM integration failed at t=" + std::to_string(result.failure_time)
                                + ": " + result.message,
                            result.failure_time);
    }

    const auto& L = out.layout;
    const double area = flow_rate / (params.interstitial_velocity * params.col_porosity);
    const double dz = params.length / L.cells;
    const double particle_volume = params.particle_radius * params.particle_radius
        * params.particle_radius / 3.0;
    out.outflow_integral.resize(n_comp);
    out.held.resize(n_comp);
    for (int i = 0; i < n_comp; ++i) {
        out.outflow_integral[i] = state[L.outflow(i)];
        double held = 0.0;
        for (int j = 0; j < L.cells; ++j) {
            double cell = params.col_porosity * state[L.bulk(j, i)];
            double particle = 0.0;
            for (int l = 0; l < L.shells; ++l) {
                const double r0 = l * params.particle_radius / L.shells;
                const double r1 = (l + 1) * params.particle_radius / L.shells;
                const double vol = (r1 * r1 * r1 - r0 * r0 * r0) / 3.0;
                double shell = params.particle_porosity * state[L.pore(j, l, i)];
                if (L.proteins > 0) {
                    if (i == 0) {
                        shell += (1.0 - params.particle_porosity)
                            * sma_bound_salt(*binding, state.data() + L.bound(j, l, 0));
                    } else {
                        shell += (1.0 - params.particle_porosity) * state[L.bound(j, l, i - 1)];
                    }
                }
                particle += shell * vol;
            }
            cell += (1.0 - params.col_porosity) * particle / particle_volume;
            held += cell;
        }
        out.held[i] = area * dz * held;
    }
    out.final_state = Eigen::Map<Eigen::VectorXd>(state.data(), state.size());
    return out;
}

} // namespace elute
