#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>

namespace elute {

/// Counter-free deterministic RNG stream. All variate generation is
/// implemented on top of raw mt19937_64 words so that draw sequences are
/// identical across platforms and standard libraries.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed);

    /// Uniform double in [0, 1).
    double uniform();
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi);
    /// Standard normal (Marsaglia polar method, one spare cached).
    double normal();
    /// Gamma(shape, scale=1), Marsaglia-Tsang squeeze for shape >= 1,
    /// boosted from shape+1 for shape < 1.
    double gamma(double shape);
    /// Inverse gamma with shape alpha and scale beta: 1/X, X ~ Gamma(alpha, rate=beta).
    double inverse_gamma(double alpha, double beta);
    /// Uniform integer in [0, bound).
    std::uint64_t integer(std::uint64_t bound);

    void save(std::ostream& os) const;
    void load(std::istream& is);

    /// Decorrelated child seed for stream `index` of a master seed (splitmix64).
    static std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index);

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace elute
