#include "elute/errors.hpp"
#include "elute/integrator.hpp"
#include "elute/sma.hpp"

#include <doctest.h>

#include <cmath>

using namespace elute;

namespace {

SmaParams single_protein(double ka, double kd, double nu, double steric, double capacity) {
    SmaParams p;
    p.ka = Eigen::VectorXd::Constant(1, ka);
    p.kd = Eigen::VectorXd::Constant(1, kd);
    p.nu = Eigen::VectorXd::Constant(1, nu);
    p.steric = Eigen::VectorXd::Constant(1, steric);
    p.capacity = capacity;
    return p;
}

} // namespace

TEST_CASE("empty column has zero binding rate") {
    const auto p = single_protein(2.0, 3.0, 4.5, 10.0, 100.0);
    const double cp[2] = {0.0, 0.0};
    const double q[1] = {0.0};
    double rate[1];
    REQUIRE(sma_rate(p, cp, q, rate));
    CHECK(rate[0] == 0.0);
}

TEST_CASE("hand-computed rate: ka=kd=nu=1, sigma=0, capacity=10") {
    const auto p = single_protein(1.0, 1.0, 1.0, 0.0, 10.0);
    const double cp[2] = {1.0, 1.0};
    const double q[1] = {2.0}; // qbar0 = 10 - 2 = 8
    double rate[1];
    REQUIRE(sma_rate(p, cp, q, rate));
    CHECK(rate[0] == doctest::Approx(6.0).epsilon(1e-15));
}

TEST_CASE("algebraic equilibrium is the fixed point of the dynamic form") {
    const auto p = single_protein(0.75, 1.0, 3.0, 12.0, 120.0);
    const double cp_salt = 4.0, cp_prot = 0.2;
    const double q_eq = sma_equilibrium_single(p, cp_salt, cp_prot);
    REQUIRE(q_eq > 0.0);
    const double cp[2] = {cp_salt, cp_prot};
    double rate[1];
    REQUIRE(sma_rate(p, cp, &q_eq, rate));
    // scale of the two balanced fluxes
    const double scale = p.kd[0] * q_eq * std::pow(cp_salt, p.nu[0]);
    CHECK(std::abs(rate[0]) / scale < 1e-10);
}

TEST_CASE("negative available capacity flags a domain violation") {
    const auto p = single_protein(1.0, 1.0, 2.0, 3.0, 10.0);
    const double cp[2] = {1.0, 1.0};
    const double q[1] = {3.0}; // (2+3)*3 = 15 > 10
    double rate[1];
    CHECK_FALSE(sma_rate(p, cp, q, rate));
}

TEST_CASE("rate jacobian matches finite differences") {
    const auto p = single_protein(0.9, 1.4, 3.5, 8.0, 90.0);
    double cp[2] = {2.5, 0.4};
    double q[1] = {1.7};
    Eigen::MatrixXd d_dcp, d_dq;
    sma_rate_jacobian(p, cp, q, d_dcp, d_dq);

    const double h = 1e-7;
    double r0[1], r1[1];
    for (int k = 0; k < 2; ++k) {
        double lo[2] = {cp[0], cp[1]}, hi[2] = {cp[0], cp[1]};
        lo[k] -= h;
        hi[k] += h;
        REQUIRE(sma_rate(p, lo, q, r0));
        REQUIRE(sma_rate(p, hi, q, r1));
        CHECK(d_dcp(0, k) == doctest::Approx((r1[0] - r0[0]) / (2 * h)).epsilon(1e-5));
    }
    double qlo[1] = {q[0] - h}, qhi[1] = {q[0] + h};
    REQUIRE(sma_rate(p, cp, qlo, r0));
    REQUIRE(sma_rate(p, cp, qhi, r1));
    CHECK(d_dq(0, 0) == doctest::Approx((r1[0] - r0[0]) / (2 * h)).epsilon(1e-5));
}

TEST_CASE("titration capacity") {
    // constants quoted for the 1 mL column case study
    CHECK(ionic_capacity(10.0, 19.25e-6, 9.62e-7, 0.75)
          == doctest::Approx(800.4158).epsilon(1e-4));
    CHECK(ionic_capacity(10.0, 19.25e-6, 9.62e-7, 0.0)
          == doctest::Approx(10.0 * 19.25e-6 / 9.62e-7).epsilon(1e-12));
    CHECK(ionic_capacity(10.0, 0.0, 9.62e-7, 0.5) == 0.0);
    CHECK_THROWS_AS(ionic_capacity(10.0, 1e-6, 1e-6, 1.0), ConfigError);
}

namespace {

// dq/dt under constant pore-phase concentrations: 1-state relaxation.
class BatchBinding final : public OdeSystem {
public:
    BatchBinding(const SmaParams& p, double cp_salt, double cp_prot)
        : p_(p), cp_{cp_salt, cp_prot} {}
    int size() const override { return 1; }
    bool rhs(double, const double* y, double* dydt) const override {
        return sma_rate(p_, cp_, y, dydt);
    }
    void jacobian(double, const double* y,
                  std::vector<Eigen::Triplet<double>>& out) const override {
        Eigen::MatrixXd d_dcp, d_dq;
        sma_rate_jacobian(p_, cp_, y, d_dcp, d_dq);
        out.emplace_back(0, 0, d_dq(0, 0));
    }

private:
    SmaParams p_;
    double cp_[2];
};

} // namespace

TEST_CASE("dynamic form relaxes to the algebraic isotherm within 1e-8") {
    auto p = single_protein(0.5, 1.0, 4.0, 10.0, 100.0);
    p.mode = SmaParams::Mode::quasi_stationary;
    p.qs_rate_scale = 1e4;
    const double cp_salt = 5.0, cp_prot = 0.3;
    BatchBinding system(p, cp_salt, cp_prot);
    std::vector<double> y = {0.0};
    OdeOptions opt;
    opt.rel_tol = 1e-10;
    opt.abs_tol = 1e-14;
    double qbar_min = p.capacity, qbar_max = 0.0;
    const auto result = integrate_stiff(
        system, y, 0.0, 50.0, {50.0}, [](std::size_t, double, const double*) {}, opt, {},
        [&](double, const double* s) {
            const double qbar = sma_available_salt(p, s);
            qbar_min = std::min(qbar_min, qbar);
            qbar_max = std::max(qbar_max, qbar);
        });
    REQUIRE(result.ok);
    const double q_eq = sma_equilibrium_single(p, cp_salt, cp_prot);
    CHECK(std::abs(y[0] - q_eq) / q_eq < 1e-8);
    CHECK(qbar_min >= 0.0);
    CHECK(qbar_max <= p.capacity);
}
