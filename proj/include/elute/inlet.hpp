#pragma once

#include <Eigen/Dense>

#include <vector>

namespace elute {

/// Piecewise-linear injection profile: step segments (load, wash) hold a
/// constant concentration, gradient segments ramp linearly. Past the last
/// segment the final concentrations are held.
struct InletSegment {
    double duration = 0.0;
    Eigen::VectorXd c_start;
    Eigen::VectorXd c_end;
};

class InletProfile {
public:
    InletProfile() = default;
    InletProfile(int n_components, std::vector<InletSegment> segments);

    int n_components() const { return n_components_; }
    double total_duration() const;
    void eval(double t, double* c) const;
    Eigen::VectorXd eval(double t) const;

    /// Exact integral of c_in over [0, t] per component (piecewise linear).
    Eigen::VectorXd integral(double t) const;

    /// Segment boundary times (integrator breakpoints).
    std::vector<double> boundaries() const;

    const std::vector<InletSegment>& segments() const { return segments_; }

private:
    int n_components_ = 0;
    std::vector<InletSegment> segments_;
    std::vector<double> starts_; // cumulative start time per segment
};

} // namespace elute
