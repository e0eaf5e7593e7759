#include "elute/interp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace elute {

namespace {

size_t bracket(const std::vector<double>& x, double t) {
    // Largest i with x[i] <= t, clamped to [0, n-2].
    const auto it = std::upper_bound(x.begin(), x.end(), t);
    if (it == x.begin()) {
        return 0;
    }
    size_t i = static_cast<size_t>(it - x.begin()) - 1;
    return std::min(i, x.size() - 2);
}

} // namespace

PchipInterpolant::PchipInterpolant(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const size_t n = x_.size();
    if (n != y_.size() || n < 2) {
        throw std::invalid_argument("pchip needs >= 2 matching points");
    }
    for (size_t i = 0; i + 1 < n; ++i) {
        if (!(x_[i + 1] > x_[i])) {
            throw std::invalid_argument("pchip abscissae must increase strictly");
        }
    }
    std::vector<double> h(n - 1), delta(n - 1);
    for (size_t i = 0; i + 1 < n; ++i) {
        h[i] = x_[i + 1] - x_[i];
        delta[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    slope_.assign(n, 0.0);
    for (size_t i = 1; i + 1 < n; ++i) {
        if (delta[i - 1] * delta[i] > 0.0) {
            const double w1 = 2.0 * h[i] + h[i - 1];
            const double w2 = h[i] + 2.0 * h[i - 1];
            slope_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    // One-sided endpoint slopes, clipped to keep monotonicity.
    auto endpoint = [](double h0, double h1, double d0, double d1) {
        double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (s * d0 <= 0.0) {
            s = 0.0;
        } else if (d0 * d1 < 0.0 && std::abs(s) > 3.0 * std::abs(d0)) {
            s = 3.0 * d0;
        }
        return s;
    };
    if (n == 2) {
        slope_[0] = slope_[1] = delta[0];
    } else {
        slope_[0] = endpoint(h[0], h[1], delta[0], delta[1]);
        slope_[n - 1] = endpoint(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    }
}

double PchipInterpolant::operator()(double t) const {
    if (t <= x_.front()) {
        return y_.front();
    }
    if (t >= x_.back()) {
        return y_.back();
    }
    const size_t i = bracket(x_, t);
    const double h = x_[i + 1] - x_[i];
    const double s = (t - x_[i]) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    const double h10 = s3 - 2.0 * s2 + s;
    const double h01 = -2.0 * s3 + 3.0 * s2;
    const double h11 = s3 - s2;
    return h00 * y_[i] + h10 * h * slope_[i] + h01 * y_[i + 1] + h11 * h * slope_[i + 1];
}

LinearInterpolant::LinearInterpolant(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() != y_.size() || x_.size() < 2) {
        throw std::invalid_argument("linear interpolant needs >= 2 matching points");
    }
}

double LinearInterpolant::operator()(double t) const {
    if (t <= x_.front()) {
        return y_.front();
    }
    if (t >= x_.back()) {
        return y_.back();
    }
    const size_t i = bracket(x_, t);
    const double w = (t - x_[i]) / (x_[i + 1] - x_[i]);
    return (1.0 - w) * y_[i] + w * y_[i + 1];
}

} // namespace elute
