#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ctrldiff/pairing.hpp"
#include "oracles.hpp"

using namespace ctrldiff;

namespace {

GridPolicy sign_policy(int n) {
    return GridPolicy::from_function(
        RectGrid({Axis(-3, 3, n)}), false, ControlSet::symmetric(1.0, 1),
        [](const Vec& x) { return Vec{x[0] > 0.0 ? 1.0 : (x[0] < 0.0 ? -1.0 : 0.0)}; });
}

}  // namespace

TEST_CASE("zero test function pairs to zero") {
    auto p = sign_policy(61);
    TestFn f = [](std::span<const double>) { return 0.0; };
    PairFn g = [](std::span<const double>, std::span<const double> z) { return z[0]; };
    REQUIRE(borkar_pairing(p, f, g) == 0.0);
}

TEST_CASE("constants factor out of the pairing") {
    auto p = GridPolicy::constant(RectGrid({Axis(-1, 2, 31)}), false,
                                  ControlSet::symmetric(2.0, 1), Vec{1.3});
    TestFn f = [](std::span<const double> x) { return std::max(0.0, 1.0 - std::abs(x[0] - 0.5)); };
    PairFn g = [](std::span<const double>, std::span<const double> z) { return z[0]; };
    // integral of the hat itself on the same grid
    double hat_integral = 0.0;
    {
        const auto& grid = p.grid();
        std::vector<int> idx(1);
        for (std::int64_t i = 0; i < grid.num_nodes(); ++i) {
            grid.unflatten(i, idx);
            hat_integral += trapezoid_weight(grid, idx) * f(grid.node(i));
        }
    }
    REQUIRE(borkar_pairing(p, f, g) == Catch::Approx(1.3 * hat_integral).epsilon(1e-12));
}

TEST_CASE("pairing matches a refined-grid quadrature oracle") {
    auto p = sign_policy(601);
    TestFn f = [](std::span<const double> x) { return std::exp(-x[0] * x[0]); };
    PairFn g = [](std::span<const double>, std::span<const double> z) { return z[0] * z[0]; };
    const double got = borkar_pairing(p, f, g);
    const double want = oracles::pairing_quadrature(
        [](double x) { return std::exp(-x * x); }, [](double, double z) { return z * z; },
        [](double x) { return x >= 0.0 ? 1.0 : -1.0; }, -3.0, 3.0, 60001);
    REQUIRE(got == Catch::Approx(want).margin(1e-4));
}

TEST_CASE("identical policies have zero gap") {
    auto p = sign_policy(121);
    auto dict = default_dictionary(3.0);
    REQUIRE(pairing_gap(p, p, dict) == 0.0);
}

TEST_CASE("uniform value shift moves a linear pairing by |delta| int f") {
    auto p = GridPolicy::constant(RectGrid({Axis(-2, 2, 81)}), false,
                                  ControlSet::symmetric(2.0, 1), Vec{0.2});
    const double delta = 0.45;
    auto q = GridPolicy::constant(p.grid(), false, p.control_set(), Vec{0.2 + delta});
    PairingDictionary dict;
    TestFn f = [](std::span<const double> x) { return std::exp(-x[0] * x[0]); };
    PairFn g = [](std::span<const double>, std::span<const double> z) { return z[0]; };
    dict.entries.push_back({f, g, 2.0, "gauss*zeta"});
    double f_integral = 0.0;
    {
        std::vector<int> idx(1);
        for (std::int64_t i = 0; i < p.grid().num_nodes(); ++i) {
            p.grid().unflatten(i, idx);
            f_integral += trapezoid_weight(p.grid(), idx) * f(p.grid().node(i));
        }
    }
    REQUIRE(pairing_gap(p, q, dict) == Catch::Approx(delta * f_integral).epsilon(1e-12));
}

TEST_CASE("gap to the mollified policy decreases down the eta ladder") {
    auto p = sign_policy(301);
    auto dict = default_dictionary(3.0);
    std::vector<double> gaps;
    for (double eta : {0.8, 0.4, 0.2, 0.1}) {
        auto res = mollify(p, eta);
        gaps.push_back(pairing_gap(p, res.policy, dict));
    }
    for (size_t i = 1; i < gaps.size(); ++i) REQUIRE(gaps[i] <= gaps[i - 1] + 1e-12);
    REQUIRE(gaps.back() <= 0.05 * gaps.front());
}

TEST_CASE("empty dictionary is rejected") {
    auto p = sign_policy(11);
    REQUIRE_THROWS_AS(pairing_gap(p, p, PairingDictionary{}), std::invalid_argument);
}

TEST_CASE("time-extended dictionary windows the time axis") {
    RectGrid g({Axis(0, 1, 11), Axis(-3, 3, 31)});
    auto p = GridPolicy::constant(g, true, ControlSet::symmetric(1.0, 1), Vec{0.5});
    auto dict = default_dictionary(3.0, true, 1.0);
    // window is sin(pi t / T): vanishes at t in {0, T}, so the pairing is
    // finite and strictly positive for the first (gauss, zeta) pair
    const double val = borkar_pairing(p, dict.entries[0].f, dict.entries[0].g);
    REQUIRE(val > 0.0);
}
