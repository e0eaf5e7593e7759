#include "elute/kde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace elute {

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const size_t lo = static_cast<size_t>(pos);
    const size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return (1.0 - w) * sorted[lo] + w * sorted[hi];
}

} // namespace

double silverman_bandwidth(std::span<const double> data) {
    const size_t k = data.size();
    if (k < 2) {
        throw std::invalid_argument("bandwidth needs >= 2 samples");
    }
    double mean = 0.0;
    for (const double v : data) {
        mean += v;
    }
    mean /= static_cast<double>(k);
    double ss = 0.0;
    for (const double v : data) {
        ss += (v - mean) * (v - mean);
    }
    const double sd = std::sqrt(ss / static_cast<double>(k - 1));
    std::vector<double> sorted(data.begin(), data.end());
    std::sort(sorted.begin(), sorted.end());
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    double spread = sd;
    if (iqr > 0.0) {
        spread = std::min(spread, iqr / 1.34);
    }
    return 0.9 * spread * std::pow(static_cast<double>(k), -0.2);
}

std::vector<double> kde_gaussian(std::span<const double> data, std::span<const double> grid,
                                 double bandwidth) {
    std::vector<double> density(grid.size(), 0.0);
    if (data.empty() || grid.empty()) {
        return density;
    }
    if (!(bandwidth > 0.0)) {
        // Degenerate sample: discrete spike on the nearest grid cell.
        double mean = 0.0;
        for (const double v : data) {
            mean += v;
        }
        mean /= static_cast<double>(data.size());
        size_t nearest = 0;
        double best = std::numeric_limits<double>::infinity();
        for (size_t g = 0; g < grid.size(); ++g) {
            const double d = std::abs(grid[g] - mean);
            if (d < best) {
                best = d;
                nearest = g;
            }
        }
        const double cell = grid.size() > 1 ? std::abs(grid[1] - grid[0]) : 1.0;
        density[nearest] = cell > 0.0 ? 1.0 / cell : 1.0;
        return density;
    }
    const double norm =
        1.0 / (static_cast<double>(data.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
    for (size_t g = 0; g < grid.size(); ++g) {
        double acc = 0.0;
        for (const double v : data) {
            const double u = (grid[g] - v) / bandwidth;
            acc += std::exp(-0.5 * u * u);
        }
        density[g] = norm * acc;
    }
    return density;
}

} // namespace elute
