#include "elute/inlet.hpp"

#include "elute/errors.hpp"

namespace elute {

InletProfile::InletProfile(int n_components, std::vector<InletSegment> segments)
    : n_components_(n_components), segments_(std::move(segments)) {
    if (n_components_ < 1) {
        throw ConfigError("inlet profile needs at least one component");
    }
    double t = 0.0;
    for (const auto& seg : segments_) {
        if (!(seg.duration > 0.0)) {
            throw ConfigError("inlet segment durations must be positive");
        }
        if (seg.c_start.size() != n_components_ || seg.c_end.size() != n_components_) {
            throw ConfigError("inlet segment concentration count mismatch");
        }
        if ((seg.c_start.array() < 0.0).any() || (seg.c_end.array() < 0.0).any()) {
            throw ConfigError("inlet concentrations must be non-negative");
        }
        starts_.push_back(t);
        t += seg.duration;
    }
}

double InletProfile::total_duration() const {
    return segments_.empty() ? 0.0 : starts_.back() + segments_.back().duration;
}

void InletProfile::eval(double t, double* c) const {
    if (segments_.empty()) {
        for (int i = 0; i < n_components_; ++i) {
            c[i] = 0.0;
        }
        return;
    }
    if (t <= 0.0) {
        for (int i = 0; i < n_components_; ++i) {
            c[i] = segments_.front().c_start[i];
        }
        return;
    }
    for (size_t s = 0; s < segments_.size(); ++s) {
        const double t_end = starts_[s] + segments_[s].duration;
        if (t <= t_end || s + 1 == segments_.size()) {
            if (t > t_end) { // past the last segment: hold final value
                for (int i = 0; i < n_components_; ++i) {
                    c[i] = segments_[s].c_end[i];
                }
                return;
            }
            const double w = (t - starts_[s]) / segments_[s].duration;
            for (int i = 0; i < n_components_; ++i) {
                c[i] = (1.0 - w) * segments_[s].c_start[i] + w * segments_[s].c_end[i];
            }
            return;
        }
    }
}

Eigen::VectorXd InletProfile::eval(double t) const {
    Eigen::VectorXd c(n_components_);
    eval(t, c.data());
    return c;
}

Eigen::VectorXd InletProfile::integral(double t) const {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(n_components_);
    for (size_t s = 0; s < segments_.size(); ++s) {
        if (t <= starts_[s]) {
            break;
        }
        const double within = std::min(t - starts_[s], segments_[s].duration);
        const double w_end = within / segments_[s].duration;
        // trapezoid of the linear ramp from c_start to its value at w_end
        const Eigen::VectorXd c_at = (1.0 - w_end) * segments_[s].c_start + w_end * segments_[s].c_end;
        acc += 0.5 * (segments_[s].c_start + c_at) * within;
    }
    if (!segments_.empty()) {
        const double t_total = total_duration();
        if (t > t_total) {
            acc += segments_.back().c_end * (t - t_total);
        }
    }
    return acc;
}

std::vector<double> InletProfile::boundaries() const {
    std::vector<double> b(starts_);
    if (!segments_.empty()) {
        b.push_back(total_duration());
    }
    return b;
}

} // namespace elute
