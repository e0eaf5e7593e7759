#include "elute/csv.hpp"
#include "elute/interp.hpp"
#include "elute/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>
#include <vector>

using namespace elute;

TEST_CASE("rng streams are deterministic and decorrelated") {
    RngStream a(42), b(42), c(43);
    bool all_equal = true;
    bool any_equal_cross = false;
    for (int i = 0; i < 1000; ++i) {
        const double ua = a.uniform();
        const double ub = b.uniform();
        const double uc = c.uniform();
        all_equal = all_equal && ua == ub;
        any_equal_cross = any_equal_cross || ua == uc;
    }
    CHECK(all_equal);
    CHECK_FALSE(any_equal_cross);

    CHECK(RngStream::substream_seed(7, 0) != RngStream::substream_seed(7, 1));
}

TEST_CASE("uniform stays in [0,1)") {
    RngStream rng(1);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("normal and gamma match their moments") {
    RngStream rng(7);
    const int n = 500000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sum2 += x * x;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(var == doctest::Approx(1.0).epsilon(0.02));

    sum = sum2 = 0.0;
    const double shape = 2.5;
    for (int i = 0; i < n; ++i) {
        const double x = rng.gamma(shape);
        sum += x;
        sum2 += x * x;
    }
    const double gmean = sum / n;
    const double gvar = sum2 / n - gmean * gmean;
    CHECK(gmean == doctest::Approx(shape).epsilon(0.01));
    CHECK(gvar == doctest::Approx(shape).epsilon(0.03));

    // small-shape boost path
    sum = 0.0;
    for (int i = 0; i < n; ++i) {
        sum += rng.gamma(0.5);
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("inverse gamma mean matches beta/(alpha-1)") {
    RngStream rng(11);
    const int n = 1000000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        sum += rng.inverse_gamma(3.0, 2.0);
    }
    CHECK(sum / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("rng state save/load resumes the exact sequence") {
    RngStream rng(99);
    for (int i = 0; i < 137; ++i) {
        rng.normal();
        rng.uniform();
    }
    std::stringstream state;
    rng.save(state);
    std::vector<double> expected;
    for (int i = 0; i < 100; ++i) {
        expected.push_back(rng.normal());
        expected.push_back(rng.gamma(1.7));
    }
    RngStream restored(0);
    restored.load(state);
    for (int i = 0; i < 100; ++i) {
        CHECK(restored.normal() == expected[2 * i]);
        CHECK(restored.gamma(1.7) == expected[2 * i + 1]);
    }
}

TEST_CASE("csv round trip preserves doubles exactly") {
    const std::string path =
        (std::filesystem::temp_directory_path() / "elute_csv_test.csv").string();
    std::vector<std::vector<double>> rows = {{1.0 / 3.0, 2.5e-300, 0.0},
                                             {-7.25, 1e18, 3.141592653589793}};
    write_csv(path, {"a", "b", "c"}, rows);
    const CsvTable table = read_csv(path);
    REQUIRE(table.header.size() == 3);
    CHECK(table.column("b") == 1);
    CHECK(table.column("nope") == -1);
    REQUIRE(table.rows.size() == 2);
    for (size_t r = 0; r < rows.size(); ++r) {
        for (size_t c = 0; c < rows[r].size(); ++c) {
            CHECK(table.rows[r][c] == rows[r][c]);
        }
    }
    std::filesystem::remove(path);
}

TEST_CASE("pchip is exact on linear data and preserves monotonicity") {
    std::vector<double> x = {0.0, 1.0, 2.5, 4.0};
    std::vector<double> linear = {1.0, 3.0, 6.0, 9.0};
    PchipInterpolant lin(x, linear);
    for (double t = 0.0; t <= 4.0; t += 0.125) {
        CHECK(lin(t) == doctest::Approx(1.0 + 2.0 * t).epsilon(1e-12));
    }

    std::vector<double> xs, ys;
    for (int i = 0; i <= 20; ++i) {
        xs.push_back(i * 0.5);
        ys.push_back(i < 10 ? 0.0 : (i < 14 ? (i - 9) * 2.0 : 10.0)); // monotone ramp
    }
    PchipInterpolant mono(xs, ys);
    double prev = mono(0.0);
    for (double t = 0.0; t <= 10.0; t += 0.01) {
        const double v = mono(t);
        CHECK(v >= prev - 1e-12);
        CHECK(v <= 10.0 + 1e-12);
        prev = v;
    }
    CHECK(mono(-5.0) == ys.front());
    CHECK(mono(50.0) == ys.back());
}
