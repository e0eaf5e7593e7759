#include "elute/rng.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace elute {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

RngStream::RngStream(std::uint64_t seed) : engine_(seed) {}

std::uint64_t RngStream::substream_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t state = master;
    std::uint64_t out = 0;
    for (std::uint64_t i = 0; i <= index + 1; ++i) {
        out = splitmix64(state);
    }
    return out;
}

double RngStream::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double RngStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

double RngStream::gamma(double shape) {
    if (!(shape > 0.0)) {
        throw std::invalid_argument("gamma shape must be positive");
    }
    if (shape < 1.0) {
        // Gamma(a) = Gamma(a+1) * U^(1/a)
        const double g = gamma(shape + 1.0);
        double u = uniform();
        while (u == 0.0) {
            u = uniform();
        }
        return g * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) {
            return d * v;
        }
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
            return d * v;
        }
    }
}

double RngStream::inverse_gamma(double alpha, double beta) {
    if (!(alpha > 0.0) || !(beta > 0.0)) {
        throw std::invalid_argument("inverse_gamma requires positive shape and scale");
    }
    // X ~ Gamma(alpha, rate=beta)  =>  1/X ~ IG(alpha, beta)
    return beta / gamma(alpha);
}

std::uint64_t RngStream::integer(std::uint64_t bound) {
    if (bound == 0) {
        throw std::invalid_argument("integer bound must be positive");
    }
    // Rejection to avoid modulo bias.
    const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % bound;
    std::uint64_t r;
    do {
        r = engine_();
    } while (r >= limit);
    return r % bound;
}

void RngStream::save(std::ostream& os) const {
    os << engine_ << "\n" << (has_spare_ ? 1 : 0) << " ";
    os.precision(17);
    os << spare_ << "\n";
}

void RngStream::load(std::istream& is) {
    is >> engine_;
    int flag = 0;
    is >> flag >> spare_;
    has_spare_ = flag != 0;
}

} // namespace elute
