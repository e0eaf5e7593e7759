#include "elute/errors.hpp"
#include "elute/units.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace elute;

namespace {

std::vector<double> grid(double t_end, int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) {
        g[i] = t_end * i / (n - 1.0);
    }
    return g;
}

OdeOptions tight() {
    OdeOptions opt;
    opt.rel_tol = 1e-9;
    opt.abs_tol = 1e-12;
    return opt;
}

} // namespace

TEST_CASE("cstr holds its fixed point under matching inlet") {
    CstrParams params{1e-6, 2e-6};
    const double c0 = 3.7;
    InletFn inlet = [&](double, double* c) { c[0] = c0; };
    Eigen::VectorXd init(1);
    init << c0;
    const auto out = simulate_cstr(params, 1, inlet, grid(10.0, 51), tight(), {}, &init);
    for (long r = 0; r < out.outlet.rows(); ++r) {
        CHECK(out.outlet(r, 0) == doctest::Approx(c0).epsilon(1e-9));
    }
}

TEST_CASE("cstr step response matches 1 - exp(-Qt/V)") {
    CstrParams params{1e-6, 1e-6}; // Q/V = 1/s
    InletFn inlet = [](double, double* c) { c[0] = 1.0; };
    const auto times = grid(5.0, 101);
    const auto out = simulate_cstr(params, 1, inlet, times, tight());
    for (size_t r = 1; r < times.size(); ++r) {
        const double expected = 1.0 - std::exp(-times[r]);
        CHECK(std::abs(out.outlet(r, 0) - expected) / expected < 1e-6);
    }
    CHECK(out.outlet(20, 0) == doctest::Approx(0.63212055882).epsilon(1e-7));
}

TEST_CASE("cstr decays exponentially from an initial charge") {
    CstrParams params{1e-6, 2e-6}; // Q/V = 2/s
    InletFn inlet = [](double, double* c) { c[0] = 0.0; };
    Eigen::VectorXd init(1);
    init << 1.0;
    const auto out = simulate_cstr(params, 1, inlet, {0.25, 0.5}, tight(), {}, &init);
    CHECK(out.outlet(1, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-7));
}

TEST_CASE("cstr rejects non-positive parameters") {
    InletFn inlet = [](double, double* c) { c[0] = 0.0; };
    CHECK_THROWS_AS(simulate_cstr(CstrParams{0.0, 1e-6}, 1, inlet, {1.0}, OdeOptions{}),
                    ConfigError);
    CHECK_THROWS_AS(simulate_cstr(CstrParams{1e-6, -1.0}, 1, inlet, {1.0}, OdeOptions{}),
                    ConfigError);
}

TEST_CASE("dpfr with vanishing dispersion is plug flow") {
    DpfrParams params{0.1, 1e-16, 1e-3}; // L/u = 100 s
    const double pulse = 2.0;
    InletFn inlet = [&](double t, double* c) { c[0] = t <= pulse ? 1.0 : 0.0; };
    const auto times = grid(200.0, 801);
    const auto out =
        simulate_dpfr(params, 1e-6, 1, 200, inlet, times, OdeOptions{}, {pulse});
    long peak = 0;
    for (long r = 0; r < out.outlet.rows(); ++r) {
        if (out.outlet(r, 0) > out.outlet(peak, 0)) {
            peak = r;
        }
    }
    const double expected = 0.1 / 1e-3 + 0.5 * pulse;
    const double cell_time = (0.1 / 200) / 1e-3; // dz/u
    CHECK(std::abs(times[peak] - expected) <= cell_time + 0.25);
    CHECK_FALSE(out.warnings.empty()); // cell Peclet warning fires
}

TEST_CASE("dpfr pulse conserves mass to 1e-6") {
    DpfrParams params{0.1, 1e-6, 1e-3};
    const double flow = 1e-6;
    const double pulse = 0.5;
    InletFn inlet = [&](double t, double* c) { c[0] = t <= pulse ? 1.0 : 0.0; };
    const auto times = grid(300.0, 601); // long enough for full elution
    OdeOptions opt;
    opt.rel_tol = 1e-9;
    opt.abs_tol = 1e-13;
    const auto out = simulate_dpfr(params, flow, 1, 300, inlet, times, opt, {pulse});
    const double injected = flow * 1.0 * pulse;
    const double eluted = flow * out.outflow_integral[0];
    const double held = out.held[0];
    CHECK(std::abs(eluted + held - injected) / injected < 1e-6);
    // essentially everything has left after 3 residence times + tails
    CHECK(held / injected < 1e-4);
}

TEST_CASE("dpfr impulse matches the advection-dispersion kernel at Pe=100") {
    const double u = 1e-3, L = 0.1, D = 1e-6;
    DpfrParams params{L, D, u};
    const double pulse = 0.5;
    InletFn inlet = [&](double t, double* c) { c[0] = t <= pulse ? 1.0 : 0.0; };
    const auto times = grid(200.0, 801);
    OdeOptions opt;
    opt.rel_tol = 1e-8;
    opt.abs_tol = 1e-12;
    const auto out = simulate_dpfr(params, 1e-6, 1, 400, inlet, times, opt, {pulse});

    // Open-domain first-passage kernel (inverse Gaussian), convolved width
    // approximated by centering on the pulse midpoint.
    auto kernel = [&](double t) {
        if (t <= 0.0) {
            return 0.0;
        }
        const double num = (L - u * t) * (L - u * t);
        return L / std::sqrt(4.0 * std::numbers::pi * D * t * t * t)
            * std::exp(-num / (4.0 * D * t));
    };
    double peak = 0.0;
    double ss = 0.0;
    long count = 0;
    for (size_t r = 0; r < times.size(); ++r) {
        const double ana = pulse * kernel(times[r] - 0.5 * pulse);
        peak = std::max(peak, ana);
        const double diff = out.outlet(r, 0) - ana;
        ss += diff * diff;
        ++count;
    }
    const double rms = std::sqrt(ss / count) / peak;
    CHECK(rms < 0.01);
}
