#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ctrldiff/policy.hpp"
#include "ctrldiff/rng.hpp"
#include "oracles.hpp"

using namespace ctrldiff;

namespace {

GridPolicy sign_policy(double lo, double hi, int n, Interpolation interp = Interpolation::nearest) {
    return GridPolicy::from_function(
        RectGrid({Axis(lo, hi, n)}), false, ControlSet::symmetric(1.0, 1),
        [](const Vec& x) { return Vec{x[0] > 0.0 ? 1.0 : (x[0] < 0.0 ? -1.0 : 0.0)}; }, interp);
}

}  // namespace

TEST_CASE("constant policy evaluates to its constant everywhere") {
    auto p = GridPolicy::constant(RectGrid({Axis(-1, 1, 11)}), false,
                                  ControlSet::symmetric(2.0, 1), Vec{0.7});
    for (double x : {-1.0, -0.3, 0.0, 0.99, 5.0}) REQUIRE(p.evaluate(Vec{x})[0] == 0.7);
}

TEST_CASE("multilinear midpoint averages the nodes") {
    auto p = GridPolicy(RectGrid({Axis(0, 1, 2)}), false, ControlSet::symmetric(1.0, 1),
                        Vec{-1.0, 1.0}, Interpolation::multilinear);
    REQUIRE(p.evaluate(Vec{0.5})[0] == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(p.evaluate(Vec{0.25})[0] == Catch::Approx(-0.5));
}

TEST_CASE("nearest interpolation snaps to the closest node") {
    auto p = GridPolicy(RectGrid({Axis(0, 1, 2)}), false, ControlSet::symmetric(1.0, 1),
                        Vec{-1.0, 1.0}, Interpolation::nearest);
    REQUIRE(p.evaluate(Vec{0.4})[0] == -1.0);
    REQUIRE(p.evaluate(Vec{0.6})[0] == 1.0);
}

TEST_CASE("evaluation outside the box clamps to the boundary") {
    auto p = GridPolicy(RectGrid({Axis(0, 1, 2)}), false, ControlSet::symmetric(1.0, 1),
                        Vec{-1.0, 1.0}, Interpolation::multilinear);
    REQUIRE(p.evaluate(Vec{-3.0})[0] == -1.0);
    REQUIRE(p.evaluate(Vec{42.0})[0] == 1.0);
}

TEST_CASE("values outside the control set are rejected") {
    REQUIRE_THROWS_AS(GridPolicy(RectGrid({Axis(0, 1, 2)}), false, ControlSet::symmetric(1.0, 1),
                                 Vec{-1.5, 0.0}, Interpolation::nearest),
                      std::invalid_argument);
}

TEST_CASE("mollify of a constant policy returns it bit-exactly") {
    auto p = GridPolicy::constant(RectGrid({Axis(-2, 2, 41)}), false,
                                  ControlSet::symmetric(1.0, 1), Vec{0.37});
    auto res = mollify(p, 0.3);
    REQUIRE_FALSE(res.under_resolved);
    REQUIRE(res.policy.values() == p.values());
}

TEST_CASE("under-resolved bandwidth returns the input with a warning") {
    auto p = sign_policy(-2, 2, 41);  // spacing 0.1
    auto res = mollify(p, 0.04);
    REQUIRE(res.under_resolved);
    REQUIRE(res.policy.values() == p.values());
}

TEST_CASE("mollified sign policy: exact plateaus, odd symmetry, plateau bound") {
    const int n = 81;  // spacing 0.05 on [-2, 2]
    auto p = sign_policy(-2, 2, n);
    const double eta = 0.5;
    auto res = mollify(p, eta);
    REQUIRE_FALSE(res.under_resolved);
    const auto& g = res.policy.grid();
    const double h = g.axis(0).spacing();
    for (std::int64_t i = 0; i < g.num_nodes(); ++i) {
        const double x = g.node(i)[0];
        const double v = res.policy.value_at(i)[0];
        if (std::abs(x) >= eta + h) REQUIRE(v == (x > 0 ? 1.0 : -1.0));
        // odd symmetry, bit-exact by the paired summation
        const double vm = res.policy.value_at(g.num_nodes() - 1 - i)[0];
        REQUIRE(vm == -v);
    }
}

TEST_CASE("mollified sign policy matches the quadrature oracle near the jump") {
    const int n = 201;  // spacing 0.02 on [-2, 2]
    auto p = sign_policy(-2, 2, n);
    const double eta = 0.5;
    auto res = mollify(p, eta);
    auto vfun = [](double y) { return y > 0.0 ? 1.0 : (y < 0.0 ? -1.0 : 0.0); };
    const double h = 0.02;
    // derivative of the continuum convolution is bounded by 2 phi_eta(0)
    const double deriv_bound = 2.0 * oracles::bump1d(0.0) / eta;
    const double tol = 2.0 * h * deriv_bound;
    for (double x : {0.25, -0.25, 0.1, 0.05, 0.4, 0.0}) {
        const double discrete = res.policy.evaluate(Vec{x})[0];
        const double exact = oracles::mollify_quadrature(vfun, x, eta, -2.0, 2.0);
        CAPTURE(x);
        REQUIRE(discrete == Catch::Approx(exact).margin(tol));
    }
}

TEST_CASE("mollification keeps every node inside the control set") {
    CounterRng rng(7);
    RectGrid g({Axis(-1.5, 1.5, 61)});
    Vec vals(static_cast<size_t>(g.num_nodes()));
    for (size_t i = 0; i < vals.size(); ++i)
        vals[i] = 2.0 * rng.uniform(0, std::uint32_t(i), 0) - 1.0;
    GridPolicy p(g, false, ControlSet::symmetric(1.0, 1), vals, Interpolation::nearest);
    for (double eta : {0.08, 0.2, 0.7}) {
        auto res = mollify(p, eta);
        for (std::int64_t i = 0; i < g.num_nodes(); ++i) {
            const double v = res.policy.value_at(i)[0];
            REQUIRE(v <= 1.0);
            REQUIRE(v >= -1.0);
        }
    }
}

TEST_CASE("mollification never increases the value spread") {
    CounterRng rng(11);
    RectGrid g({Axis(-1, 1, 51)});
    Vec vals(static_cast<size_t>(g.num_nodes()));
    for (size_t i = 0; i < vals.size(); ++i)
        vals[i] = std::sin(3.0 * double(i)) * 0.8;
    GridPolicy p(g, false, ControlSet::symmetric(1.0, 1), vals, Interpolation::nearest);
    auto spread = [](const GridPolicy& q) {
        double lo = 1e300, hi = -1e300;
        for (double v : q.values()) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        return hi - lo;
    };
    double prev = spread(p);
    for (double eta : {0.05, 0.15, 0.4, 1.0}) {
        auto res = mollify(p, eta);
        REQUIRE(spread(res.policy) <= prev + 1e-15);
    }
}

TEST_CASE("mollification converges pointwise on a continuous policy") {
    // v(x) = tanh(x) on [-2, 2]; at eta = 2 spacing the node deviation is
    // bounded by the modulus of continuity at 2 eta plus interpolation error
    const int n = 201;
    const double h = 4.0 / (n - 1);
    auto p = GridPolicy::from_function(RectGrid({Axis(-2, 2, n)}), false,
                                       ControlSet::symmetric(1.0, 1),
                                       [](const Vec& x) { return Vec{std::tanh(x[0])}; },
                                       Interpolation::multilinear);
    const double eta = 2.0 * h;
    auto res = mollify(p, eta);
    double worst = 0.0;
    for (std::int64_t i = 0; i < p.grid().num_nodes(); ++i)
        worst = std::max(worst, std::abs(res.policy.value_at(i)[0] - p.value_at(i)[0]));
    const double modulus = 2.0 * eta;  // Lip(tanh) = 1
    REQUIRE(worst <= modulus + h * h);
}

TEST_CASE("lipschitz estimate: constant, linear, and mollified-sign cases") {
    auto c = GridPolicy::constant(RectGrid({Axis(0, 1, 11)}), false,
                                  ControlSet::symmetric(1.0, 1), Vec{0.5});
    REQUIRE(lipschitz_estimate(c) == 0.0);

    auto lin = GridPolicy::from_function(RectGrid({Axis(-1, 1, 21)}), false,
                                         ControlSet::symmetric(1.0, 1),
                                         [](const Vec& x) { return Vec{x[0]}; });
    REQUIRE(lipschitz_estimate(lin) == Catch::Approx(1.0));

    const double eta = 0.5;
    auto molsign = mollify(sign_policy(-2, 2, 201), eta);
    const double lip = lipschitz_estimate(molsign.policy);
    REQUIRE(std::isfinite(lip));
    // oracle: numerical derivative of the continuum convolution
    auto vfun = [](double y) { return y > 0.0 ? 1.0 : (y < 0.0 ? -1.0 : 0.0); };
    auto conv = [&](double x) { return oracles::mollify_quadrature(vfun, x, eta, -2.0, 2.0, 4000); };
    const double oracle_lip = oracles::max_abs_derivative(conv, -1.0, 1.0, 400);
    REQUIRE(lip == Catch::Approx(oracle_lip).epsilon(0.05));
    // analytic bound 2 max phi_eta
    REQUIRE(lip <= 2.0 * oracles::bump1d(0.0) / eta * 1.01);
}

TEST_CASE("lipschitz estimate skips single-node axes") {
    RectGrid g({Axis(0.0, 0.0, 1), Axis(-1, 1, 11)});
    auto p = GridPolicy::from_function(g, false, ControlSet::symmetric(1.0, 1),
                                       [](const Vec& x) { return Vec{x[1]}; });
    REQUIRE(lipschitz_estimate(p) == Catch::Approx(1.0));
}

TEST_CASE("regression bound: eta * lipschitz(mollified) stays below the frozen kernel constant") {
    // K frozen from the kernel: ||phi'||_1 = 2.1875 for the unit-range sign
    // policy, measured once over the eta ladder with margin
    const double K = 2.5;
    auto p = sign_policy(-3, 3, 301);
    for (double eta : {0.8, 0.4, 0.2, 0.1, 0.05}) {
        auto res = mollify(p, eta);
        REQUIRE(eta * lipschitz_estimate(res.policy) <= K);
    }
}

TEST_CASE("time-extended policies mollify jointly in (t, x)") {
    // policy flips sign at t = 0.5 and at x = 0
    RectGrid g({Axis(0, 1, 21), Axis(-1, 1, 21)});
    auto p = GridPolicy::from_function(g, true, ControlSet::symmetric(1.0, 1), [](const Vec& tx) {
        return Vec{(tx[0] < 0.5 ? 1.0 : -1.0) * (tx[1] >= 0.0 ? 1.0 : -1.0)};
    });
    auto res = mollify(p, 0.2);
    REQUIRE_FALSE(res.under_resolved);
    // interior plateau away from both interfaces stays exact
    REQUIRE(res.policy.evaluate(Vec{0.1, 0.7})[0] == 1.0);
    REQUIRE(res.policy.evaluate(Vec{0.9, 0.7})[0] == -1.0);
    // smoothing happened across the time interface
    const double mid = res.policy.evaluate(Vec{0.5, 0.7})[0];
    REQUIRE(std::abs(mid) < 0.5);
}
