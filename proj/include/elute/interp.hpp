#pragma once

#include <vector>

namespace elute {

/// Shape-preserving piecewise cubic (Fritsch-Carlson slopes). Monotone data
/// gives a monotone interpolant; evaluation clamps outside the abscissa range.
class PchipInterpolant {
public:
    PchipInterpolant() = default;
    PchipInterpolant(std::vector<double> x, std::vector<double> y);

    double operator()(double t) const;
    bool empty() const { return x_.empty(); }

private:
    std::vector<double> x_, y_, slope_;
};

class LinearInterpolant {
public:
    LinearInterpolant() = default;
    LinearInterpolant(std::vector<double> x, std::vector<double> y);

    double operator()(double t) const;

private:
    std::vector<double> x_, y_;
};

} // namespace elute
