#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ctrldiff/mollifier.hpp"

using ctrldiff::Mollifier;

TEST_CASE("kernel is nonnegative and supported in the unit ball") {
    Mollifier phi(1.0, 2);
    for (double r : {0.0, 0.3, 0.9, 0.999}) REQUIRE(phi.unit_density(r) > 0.0);
    for (double r : {1.0, 1.1, 5.0}) REQUIRE(phi.unit_density(r) == 0.0);
}

TEST_CASE("kernel integrates to one within quadrature tolerance, d = 1..3") {
    // tensor-grid Riemann check, independent of the radial normalization route
    for (int d = 1; d <= 3; ++d) {
        Mollifier phi(1.0, d);
        const int n = d == 3 ? 161 : 801;
        const double h = 2.0 / n;
        double acc = 0.0;
        std::vector<int> idx(static_cast<size_t>(d), 0);
        const auto total = static_cast<std::int64_t>(std::pow(n, d));
        for (std::int64_t e = 0; e < total; ++e) {
            std::int64_t r = e;
            double r2 = 0.0;
            for (int k = 0; k < d; ++k) {
                const auto i = int(r % n);
                r /= n;
                const double x = -1.0 + (i + 0.5) * h;
                r2 += x * x;
            }
            acc += phi.unit_density(std::sqrt(r2)) * std::pow(h, d);
        }
        CAPTURE(d);
        REQUIRE(acc == Catch::Approx(1.0).margin(1e-6));
    }
}

TEST_CASE("bandwidth scaling preserves mass") {
    Mollifier phi(0.25, 1);
    // 1d integral of phi_eta over [-eta, eta]
    const int n = 20001;
    const double h = 2.0 * phi.bandwidth() / (n - 1);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = -phi.bandwidth() + i * h;
        const double w = (i == 0 || i == n - 1) ? 0.5 * h : h;
        acc += w * phi.density(std::abs(x));
    }
    REQUIRE(acc == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("invalid bandwidth or dimension rejected") {
    REQUIRE_THROWS_AS(Mollifier(0.0, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(Mollifier(-1.0, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(Mollifier(1.0, 0), std::invalid_argument);
}
