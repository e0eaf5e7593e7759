#pragma once

#include <span>
#include <vector>

namespace elute {

/// Silverman's rule of thumb: 0.9 min(sd, iqr/1.34) k^(-1/5).
double silverman_bandwidth(std::span<const double> data);

/// Gaussian-kernel density estimate evaluated on `grid`. A zero bandwidth
/// (degenerate sample) collapses to a discrete spike: all mass on the grid
/// cell nearest the sample mean.
std::vector<double> kde_gaussian(std::span<const double> data, std::span<const double> grid,
                                 double bandwidth);

} // namespace elute
