#include "elute/integrator.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace elute;

namespace {

class DecaySystem final : public OdeSystem {
public:
    int size() const override { return 1; }
    bool rhs(double, const double* y, double* dydt) const override {
        dydt[0] = -y[0];
        return true;
    }
    void jacobian(double, const double*, std::vector<Eigen::Triplet<double>>& out) const override {
        out.emplace_back(0, 0, -1.0);
    }
    bool jacobian_constant() const override { return true; }
};

// y' = lambda (y - sin t) + cos t with y(0) = 0 has the smooth solution
// y = sin t; lambda = -1e6 makes the off-manifold transient extremely stiff.
class StiffRelaxation final : public OdeSystem {
public:
    int size() const override { return 1; }
    bool rhs(double t, const double* y, double* dydt) const override {
        dydt[0] = -1e6 * (y[0] - std::sin(t)) + std::cos(t);
        return true;
    }
    void jacobian(double, const double*, std::vector<Eigen::Triplet<double>>& out) const override {
        out.emplace_back(0, 0, -1e6);
    }
    bool jacobian_constant() const override { return true; }
};

// y0' = cos t, y1' = y0 (quadrature of sin).
class QuadratureSystem final : public OdeSystem {
public:
    int size() const override { return 2; }
    bool rhs(double t, const double* y, double* dydt) const override {
        dydt[0] = std::cos(t);
        dydt[1] = y[0];
        return true;
    }
    void jacobian(double, const double*, std::vector<Eigen::Triplet<double>>& out) const override {
        out.emplace_back(1, 0, 1.0);
        out.emplace_back(0, 0, 0.0);
    }
    bool jacobian_constant() const override { return true; }
};

class DomainGuard final : public OdeSystem {
public:
    int size() const override { return 1; }
    bool rhs(double, const double* y, double* dydt) const override {
        if (y[0] > 0.5) {
            return false;
        }
        dydt[0] = 1.0;
        return true;
    }
    void jacobian(double, const double*, std::vector<Eigen::Triplet<double>>& out) const override {
        out.emplace_back(0, 0, 0.0);
    }
};

OdeOptions tight() {
    OdeOptions opt;
    opt.rel_tol = 1e-9;
    opt.abs_tol = 1e-12;
    return opt;
}

} // namespace

TEST_CASE("exponential decay is integrated to tolerance") {
    DecaySystem system;
    std::vector<double> y = {1.0};
    std::vector<double> record = {0.5, 1.0, 2.0, 5.0};
    std::vector<double> got(record.size(), 0.0);
    const auto result = integrate_stiff(
        system, y, 0.0, 5.0, record,
        [&](std::size_t i, double, const double* s) { got[i] = s[0]; }, tight());
    REQUIRE(result.ok);
    for (size_t i = 0; i < record.size(); ++i) {
        CHECK(got[i] == doctest::Approx(std::exp(-record[i])).epsilon(1e-6));
    }
}

TEST_CASE("stiff relaxation stays on the slow manifold with few steps") {
    StiffRelaxation system;
    std::vector<double> y = {0.0};
    std::vector<double> record = {1.0, 2.0, 3.0};
    std::vector<double> got(record.size(), 0.0);
    OdeOptions opt;
    opt.rel_tol = 1e-7;
    opt.abs_tol = 1e-10;
    const auto result = integrate_stiff(
        system, y, 0.0, 3.0, record,
        [&](std::size_t i, double, const double* s) { got[i] = s[0]; }, opt);
    REQUIRE(result.ok);
    for (size_t i = 0; i < record.size(); ++i) {
        CHECK(got[i] == doctest::Approx(std::sin(record[i])).epsilon(1e-5));
    }
    // An explicit method would need ~1e6 steps per time unit here.
    CHECK(result.accepted + result.rejected < 20000);
}

TEST_CASE("quadrature states integrate exactly alongside") {
    QuadratureSystem system;
    std::vector<double> y = {0.0, 0.0};
    std::vector<double> record = {3.14159};
    double q = 0.0;
    const auto result = integrate_stiff(
        system, y, 0.0, 3.14159, record,
        [&](std::size_t, double, const double* s) { q = s[1]; }, tight());
    REQUIRE(result.ok);
    CHECK(q == doctest::Approx(1.0 - std::cos(3.14159)).epsilon(1e-7));
}

TEST_CASE("domain violations collapse the step and report failure time") {
    DomainGuard system;
    std::vector<double> y = {0.0};
    std::vector<double> record = {1.0};
    const auto result = integrate_stiff(
        system, y, 0.0, 1.0, record, [](std::size_t, double, const double*) {},
        OdeOptions{});
    CHECK_FALSE(result.ok);
    CHECK(result.failure_time == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("breakpoints keep discontinuous forcing accurate") {
    // y' = a(t) with a jumping from 0 to 1 at t = 1.
    class Forced final : public OdeSystem {
    public:
        int size() const override { return 1; }
        bool rhs(double t, const double*, double* dydt) const override {
            dydt[0] = t >= 1.0 ? 1.0 : 0.0;
            return true;
        }
        void jacobian(double, const double*,
                      std::vector<Eigen::Triplet<double>>& out) const override {
            out.emplace_back(0, 0, 0.0);
        }
        bool jacobian_constant() const override { return true; }
    };
    Forced system;
    std::vector<double> y = {0.0};
    std::vector<double> record = {2.0};
    double v = -1.0;
    const auto result = integrate_stiff(
        system, y, 0.0, 2.0, record,
        [&](std::size_t, double, const double* s) { v = s[0]; }, tight(), {1.0});
    REQUIRE(result.ok);
    CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("record times between steps are interpolated") {
    DecaySystem system;
    std::vector<double> y = {1.0};
    std::vector<double> record;
    for (int i = 0; i <= 100; ++i) {
        record.push_back(0.05 * i);
    }
    std::vector<double> got(record.size(), 0.0);
    OdeOptions opt; // default tolerance, steps larger than the record spacing
    const auto result = integrate_stiff(
        system, y, 0.0, 5.0, record,
        [&](std::size_t i, double, const double* s) { got[i] = s[0]; }, opt);
    REQUIRE(result.ok);
    for (size_t i = 0; i < record.size(); ++i) {
        CHECK(got[i] == doctest::Approx(std::exp(-record[i])).epsilon(2e-4));
    }
}
