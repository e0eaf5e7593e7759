#pragma once

#include <Eigen/Sparse>

#include <functional>
#include <string>
#include <vector>

namespace elute {

/// Right-hand side + approximate Jacobian of an ODE system y' = f(t, y).
/// The Jacobian may be inexact (upwind part of a limited flux, frozen
/// coefficients); it serves as the chord-iteration matrix. The entry ORDER
/// and sparsity pattern must be identical on every call. rhs() returning
/// false flags a domain violation (e.g. negative binding capacity) and
/// rejects the step.
class OdeSystem {
public:
    virtual ~OdeSystem() = default;
    virtual int size() const = 0;
    virtual bool rhs(double t, const double* y, double* dydt) const = 0;
    virtual void jacobian(double t, const double* y,
                          std::vector<Eigen::Triplet<double>>& out) const = 0;
    virtual bool jacobian_constant() const { return false; }
};

struct OdeOptions {
    double rel_tol = 1e-6;
    double abs_tol = 1e-8;
    double h_init = 0.0; // 0 -> span * 1e-4
    double h_min = 0.0; // 0 -> floating-point progress floor
    double h_max = 0.0; // 0 -> unrestricted
    long max_steps = 5'000'000;
};

struct OdeResult {
    bool ok = true;
    double failure_time = 0.0;
    long accepted = 0;
    long rejected = 0;
    std::string message;
};

using RecordCallback = std::function<void(std::size_t index, double t, const double* y)>;
using StepCallback = std::function<void(double t, const double* y)>;

/// Adaptive two-stage SDIRK (gamma = 1 - 1/sqrt(2)): L-stable, stiffly
/// accurate, order 2, with a filtered first-order embedded error estimate.
/// Stage equations are solved by chord Newton against one LU factorization
/// per step. `record_times` must be sorted within [t0, t1]; states at those
/// times come from linear in-step interpolation. `breakpoints` are forcing
/// discontinuities steps may not straddle.
OdeResult integrate_stiff(const OdeSystem& system, std::vector<double>& state,
                          double t0, double t1,
                          const std::vector<double>& record_times,
                          const RecordCallback& record,
                          const OdeOptions& options,
                          const std::vector<double>& breakpoints = {},
                          const StepCallback& on_accepted_step = nullptr);

} // namespace elute
