#include "elute/integrator.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>

namespace elute {

namespace {

// Alexander's two-stage SDIRK: gamma = 1 - 1/sqrt(2), stage weights
// b = (1 - gamma, gamma) equal to the last stage row (stiffly accurate).
constexpr double kGamma = 0.29289321881345247560;
constexpr double kNewtonTol = 0.03; // fraction of the unit error
constexpr int kNewtonMax = 8;

// Maps repeated triplet emissions onto compressed storage slots so the
// iteration matrix I - h*gamma*J can be refilled without re-sorting.
class SlotMatrix {
public:
    void build(int n, const std::vector<Eigen::Triplet<double>>& entries) {
        n_ = n;
        std::vector<Eigen::Triplet<double>> all(entries);
        for (int i = 0; i < n; ++i) {
            all.emplace_back(i, i, 0.0);
        }
        matrix_.resize(n, n);
        matrix_.setFromTriplets(all.begin(), all.end());
        matrix_.makeCompressed();
        slots_.resize(entries.size());
        for (size_t k = 0; k < entries.size(); ++k) {
            slots_[k] = find_slot(entries[k].row(), entries[k].col());
        }
        diag_slots_.resize(n);
        for (int i = 0; i < n; ++i) {
            diag_slots_[i] = find_slot(i, i);
        }
    }

    void fill(const std::vector<Eigen::Triplet<double>>& entries, double hg) {
        double* values = matrix_.valuePtr();
        std::fill(values, values + matrix_.nonZeros(), 0.0);
        for (size_t k = 0; k < entries.size(); ++k) {
            values[slots_[k]] -= hg * entries[k].value();
        }
        for (int i = 0; i < n_; ++i) {
            values[diag_slots_[i]] += 1.0;
        }
    }

    const Eigen::SparseMatrix<double>& matrix() const { return matrix_; }

private:
    std::ptrdiff_t find_slot(int row, int col) const {
        const auto* outer = matrix_.outerIndexPtr();
        const auto* inner = matrix_.innerIndexPtr();
        for (auto k = outer[col]; k < outer[col + 1]; ++k) {
            if (inner[k] == row) {
                return k;
            }
        }
        throw std::logic_error("jacobian entry outside analyzed pattern");
    }

    int n_ = 0;
    Eigen::SparseMatrix<double> matrix_;
    std::vector<std::ptrdiff_t> slots_;
    std::vector<std::ptrdiff_t> diag_slots_;
};

} // namespace

OdeResult integrate_stiff(const OdeSystem& system, std::vector<double>& state,
                          double t0, double t1,
                          const std::vector<double>& record_times,
                          const RecordCallback& record,
                          const OdeOptions& options,
                          const std::vector<double>& breakpoints,
                          const StepCallback& on_accepted_step) {
    OdeResult result;
    const int n = system.size();
    const double span = t1 - t0;
    if (span <= 0.0) {
        result.ok = false;
        result.message = "integration span must be positive";
        return result;
    }

    Eigen::Map<Eigen::VectorXd> y(state.data(), n);
    Eigen::VectorXd f_n(n), f1(n), f2(n), stage(n), residual(n), delta(n), y_new(n), est(n);
    Eigen::VectorXd scratch(n);

    std::vector<Eigen::Triplet<double>> jac;
    SlotMatrix iteration_matrix;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    bool pattern_ready = false;
    bool jac_current = false;
    double factored_hg = std::numeric_limits<double>::quiet_NaN();

    auto scaled_rms = [&](const Eigen::VectorXd& v, const Eigen::VectorXd& ref) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double scale = options.abs_tol + options.rel_tol * std::abs(ref[i]);
            const double r = v[i] / scale;
            acc += r * r;
        }
        return std::sqrt(acc / n);
    };

    // Chord-Newton stage solve: Y = base + h*gamma*f(ts, Y), started from Y0.
    auto solve_stage = [&](double ts, const Eigen::VectorXd& base, Eigen::VectorXd& Y,
                           Eigen::VectorXd& f_out) {
        for (int it = 0; it < kNewtonMax; ++it) {
            if (!system.rhs(ts, Y.data(), f_out.data()) || !f_out.allFinite()) {
                return false;
            }
            residual = Y - base - (factored_hg * f_out);
            delta = lu.solve(residual);
            if (!delta.allFinite()) {
                return false;
            }
            Y -= delta;
            if (scaled_rms(delta, Y) < kNewtonTol) {
                return true;
            }
        }
        return false;
    };

    std::size_t record_idx = 0;
    while (record_idx < record_times.size() && record_times[record_idx] <= t0) {
        record(record_idx, t0, state.data());
        ++record_idx;
    }

    std::vector<double> breaks(breakpoints);
    std::sort(breaks.begin(), breaks.end());
    std::size_t break_idx = 0;

    double t = t0;
    const double h_max = options.h_max > 0.0 ? options.h_max : span;
    double h = options.h_init > 0.0 ? options.h_init : span * 1e-4;
    h = std::min(h, h_max);
    const double snap = 1e-12 * span;
    // Progress floor: below this the time variable cannot advance in double
    // precision (boundary layers may legitimately need very small steps).
    auto h_floor = [&](double at) {
        return std::max({options.h_min,
                         4.0 * std::numeric_limits<double>::epsilon() * std::abs(at),
                         std::numeric_limits<double>::denorm_min()});
    };

    while (t < t1 - snap) {
        if (result.accepted + result.rejected >= options.max_steps) {
            result.ok = false;
            result.failure_time = t;
            result.message = "step budget exhausted";
            return result;
        }
        while (break_idx < breaks.size() && breaks[break_idx] <= t + snap) {
            ++break_idx;
        }
        double h_eff = std::min(h, t1 - t);
        if (break_idx < breaks.size()) {
            h_eff = std::min(h_eff, breaks[break_idx] - t);
        }
        if (h_eff < h_floor(t)) {
            result.ok = false;
            result.failure_time = t;
            result.message = "step size below minimum";
            return result;
        }

        bool ok = system.rhs(t, y.data(), f_n.data()) && f_n.allFinite();
        if (ok) {
            if (!jac_current || !system.jacobian_constant()) {
                jac.clear();
                system.jacobian(t, y.data(), jac);
                jac_current = true;
                factored_hg = std::numeric_limits<double>::quiet_NaN();
            }
            const double hg = h_eff * kGamma;
            if (hg != factored_hg) {
                if (!pattern_ready) {
                    iteration_matrix.build(n, jac);
                    iteration_matrix.fill(jac, hg);
                    lu.analyzePattern(iteration_matrix.matrix());
                    pattern_ready = true;
                } else {
                    iteration_matrix.fill(jac, hg);
                }
                lu.factorize(iteration_matrix.matrix());
                ok = lu.info() == Eigen::Success;
                if (ok) {
                    factored_hg = hg;
                }
            }
        }

        double err = std::numeric_limits<double>::infinity();
        if (ok) {
            const double hg = factored_hg;
            // Stage 1 at t + gamma h, explicit Euler predictor.
            stage = y + hg * f_n;
            ok = solve_stage(t + kGamma * h_eff, y, stage, f1);
            if (ok) {
                // Exact stage slope from the solved algebraic relation.
                f1 = (stage - y) / hg;
                // Stage 2 at t + h.
                scratch = y + (h_eff * (1.0 - kGamma)) * f1;
                y_new = stage + (h_eff * (1.0 - kGamma)) * f1; // predictor
                ok = solve_stage(t + h_eff, scratch, y_new, f2);
                if (ok) {
                    f2 = (y_new - scratch) / hg;
                    // Filtered embedded estimate hg (f2 - f1). A fraction of
                    // the raw estimate is kept as a floor so steps stay small
                    // enough for the Hermite dense output on stiff problems.
                    scratch = hg * (f2 - f1);
                    est = lu.solve(scratch);
                    if (y_new.allFinite() && est.allFinite()) {
                        err = std::max(scaled_rms(est, y_new),
                                       0.05 * scaled_rms(scratch, y_new));
                    } else {
                        ok = false;
                    }
                }
            }
        }

        if (ok && err <= 1.0) {
            const double t_next = t + h_eff;
            while (record_idx < record_times.size() && record_times[record_idx] <= t_next + snap) {
                const double tr = record_times[record_idx];
                const double w = (tr - t) / h_eff;
                // Cubic Hermite dense output from the endpoint slopes (f_n and
                // the stiffly accurate final stage slope f2).
                const double w2 = w * w;
                const double w3 = w2 * w;
                scratch = (2.0 * w3 - 3.0 * w2 + 1.0) * y + (-2.0 * w3 + 3.0 * w2) * y_new
                    + (h_eff * (w3 - 2.0 * w2 + w)) * f_n + (h_eff * (w3 - w2)) * f2;
                record(record_idx, tr, scratch.data());
                ++record_idx;
            }
            y = y_new;
            t = t_next;
            jac_current = system.jacobian_constant();
            ++result.accepted;
            if (on_accepted_step) {
                on_accepted_step(t, y.data());
            }
            const double grow = 0.9 / std::sqrt(std::max(err, 1e-10));
            h = std::min(h_max, h_eff * std::clamp(grow, 0.2, 5.0));
        } else {
            ++result.rejected;
            const double shrink =
                ok && std::isfinite(err) ? std::max(0.2, 0.9 / std::sqrt(err)) : 0.25;
            h = h_eff * shrink; // state unchanged, Jacobian values stay valid
            if (h < h_floor(t)) {
                result.ok = false;
                result.failure_time = t;
                result.message = "step size below minimum";
                return result;
            }
        }
    }

    while (record_idx < record_times.size() && record_times[record_idx] <= t1 + snap) {
        record(record_idx, t1, state.data());
        ++record_idx;
    }
    return result;
}

} // namespace elute
