#include "elute/units.hpp"

#include "elute/errors.hpp"

#include <cmath>

namespace elute {

namespace {

class CstrSystem final : public OdeSystem {
public:
    CstrSystem(const CstrParams& p, int n_comp, const InletFn& inlet)
        : rate_(p.flow_rate / p.volume), n_(n_comp), inlet_(inlet) {
        scratch_.resize(n_);
    }

    int size() const override { return 2 * n_; } // concentrations + outflow integrals

    bool rhs(double t, const double* y, double* dydt) const override {
        inlet_(t, scratch_.data());
        for (int i = 0; i < n_; ++i) {
            dydt[i] = rate_ * (scratch_[i] - y[i]);
            dydt[n_ + i] = y[i];
        }
        return true;
    }

    void jacobian(double /*t*/, const double* /*y*/,
                  std::vector<Eigen::Triplet<double>>& out) const override {
        for (int i = 0; i < n_; ++i) {
            out.emplace_back(i, i, -rate_);
            out.emplace_back(n_ + i, i, 1.0);
        }
    }

    bool jacobian_constant() const override { return true; }

private:
    double rate_;
    int n_;
    const InletFn& inlet_;
    mutable std::vector<double> scratch_;
};

// State layout per component block: [c_0 .. c_{N-1}], then one outflow
// integral per component at the tail.
class DpfrSystem final : public OdeSystem {
public:
    DpfrSystem(const DpfrParams& p, int n_comp, int cells, const InletFn& inlet)
        : u_(p.velocity), d_(p.dispersion), n_(n_comp), cells_(cells), inlet_(inlet) {
        dz_ = p.length / cells;
        c_in_.resize(n_);
    }

    int size() const override { return n_ * cells_ + n_; }

    bool rhs(double t, const double* y, double* dydt) const override {
        inlet_(t, c_in_.data());
        for (int comp = 0; comp < n_; ++comp) {
            const double* c = y + comp * cells_;
            double* dc = dydt + comp * cells_;
            double flux_prev = u_ * c_in_[comp]; // Danckwerts: total inlet flux
            for (int f = 1; f < cells_; ++f) {
                double face = c[f - 1];
                if (f >= 2) {
                    const double dn = c[f] - c[f - 1];
                    const double dp = c[f - 1] - c[f - 2];
                    if (dn != 0.0) {
                        face += 0.5 * van_leer(dp / dn) * dn;
                    }
                }
                const double flux = u_ * face - d_ * (c[f] - c[f - 1]) / dz_;
                dc[f - 1] = (flux_prev - flux) / dz_;
                flux_prev = flux;
            }
            const double flux_out = u_ * c[cells_ - 1]; // zero outlet gradient
            dc[cells_ - 1] = (flux_prev - flux_out) / dz_;
            dydt[n_ * cells_ + comp] = c[cells_ - 1];
        }
        return true;
    }

    void jacobian(double /*t*/, const double* /*y*/,
                  std::vector<Eigen::Triplet<double>>& out) const override {
        const double adv = u_ / dz_;
        const double dif = d_ / (dz_ * dz_);
        for (int comp = 0; comp < n_; ++comp) {
            const int base = comp * cells_;
            for (int j = 0; j < cells_; ++j) {
                const bool first = j == 0;
                const bool last = j == cells_ - 1;
                double diag = -adv;
                if (!first) {
                    out.emplace_back(base + j, base + j - 1, adv + dif);
                    diag -= dif;
                }
                if (!last) {
                    out.emplace_back(base + j, base + j + 1, dif);
                    diag -= dif;
                }
                out.emplace_back(base + j, base + j, diag);
            }
            out.emplace_back(n_ * cells_ + comp, base + cells_ - 1, 1.0);
        }
    }

    bool jacobian_constant() const override { return true; }

private:
    double u_, d_, dz_;
    int n_, cells_;
    const InletFn& inlet_;
    mutable std::vector<double> c_in_;
};

} // namespace

UnitOutput simulate_cstr(const CstrParams& params, int n_comp, const InletFn& inlet,
                         const std::vector<double>& record_times, const OdeOptions& options,
                         const std::vector<double>& breakpoints,
                         const Eigen::VectorXd* initial) {
    if (!(params.volume > 0.0) || !(params.flow_rate > 0.0)) {
        throw ConfigError("CSTR volume and flow rate must be positive");
    }
    if (n_comp < 1 || record_times.empty()) {
        throw ConfigError("CSTR simulation needs components and record times");
    }
    CstrSystem system(params, n_comp, inlet);
    std::vector<double> state(system.size(), 0.0);
    if (initial) {
        for (int i = 0; i < n_comp; ++i) {
            state[i] = (*initial)[i];
        }
    }
    UnitOutput out;
    out.outlet.resize(record_times.size(), n_comp);
    auto record = [&](std::size_t idx, double, const double* y) {
        for (int i = 0; i < n_comp; ++i) {
            out.outlet(idx, i) = y[i];
        }
    };
    const auto result = integrate_stiff(system, state, 0.0, record_times.back(), record_times,
                                        record, options, breakpoints);
    if (!result.ok) {
        throw NumericsError("CSTR integration failed at t=" + std::to_string(result.failure_time)
                                + ": " + result.message,
                            result.failure_time);
    }
    out.outflow_integral.resize(n_comp);
    out.held.resize(n_comp);
    for (int i = 0; i < n_comp; ++i) {
        out.outflow_integral[i] = state[n_comp + i];
        out.held[i] = params.volume * state[i];
    }
    out.final_state = Eigen::Map<Eigen::VectorXd>(state.data(), state.size());
    return out;
}

UnitOutput simulate_dpfr(const DpfrParams& params, double flow_rate, int n_comp, int cells,
                         const InletFn& inlet, const std::vector<double>& record_times,
                         const OdeOptions& options, const std::vector<double>& breakpoints) {
    if (!(params.length > 0.0) || !(params.velocity > 0.0) || params.dispersion < 0.0) {
        throw ConfigError("DPFR needs positive length/velocity and non-negative dispersion");
    }
    if (cells < 2 || n_comp < 1 || record_times.empty()) {
        throw ConfigError("DPFR simulation needs >= 2 cells, components and record times");
    }
    DpfrSystem system(params, n_comp, cells, inlet);
    std::vector<double> state(system.size(), 0.0);
    UnitOutput out;
    out.outlet.resize(record_times.size(), n_comp);
    auto record = [&](std::size_t idx, double, const double* y) {
        for (int i = 0; i < n_comp; ++i) {
            out.outlet(idx, i) = y[(i + 1) * cells - 1];
        }
    };
    const auto result = integrate_stiff(system, state, 0.0, record_times.back(), record_times,
                                        record, options, breakpoints);
    if (!result.ok) {
        throw NumericsError("DPFR integration failed at t=" + std::to_string(result.failure_time)
                                + ": " + result.message,
                            result.failure_time);
    }
    const double dz = params.length / cells;
    if (params.dispersion > 0.0) {
        const double cell_peclet = params.velocity * dz / params.dispersion;
        if (cell_peclet > 50.0) {
            out.warnings.push_back("DPFR cell Peclet number " + std::to_string(cell_peclet)
                                   + " is large; sharp fronts may be under-resolved");
        }
    }
    const double area = flow_rate / params.velocity;
    out.outflow_integral.resize(n_comp);
    out.held.resize(n_comp);
    for (int i = 0; i < n_comp; ++i) {
        out.outflow_integral[i] = state[n_comp * cells + i];
        double sum = 0.0;
        for (int j = 0; j < cells; ++j) {
            sum += state[i * cells + j];
        }
        out.held[i] = area * dz * sum;
    }
    out.final_state = Eigen::Map<Eigen::VectorXd>(state.data(), state.size());
    return out;
}

} // namespace elute
