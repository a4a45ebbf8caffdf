#include <catch2/catch_amalgamated.hpp>

#include "ctrldiff/generator.hpp"
#include "ctrldiff/problems.hpp"

using namespace ctrldiff;

namespace {

ControlProblem shifted_drift_problem() {
    // d = 1, b(x, zeta) = x + zeta, sigma = 1, c = 0
    ControlProblem pr;
    pr.dim_x = 1;
    pr.control_set = ControlSet::symmetric(2.0, 1);
    pr.drift = [](std::span<const double> x, std::span<const double> z, std::span<double> out) {
        out[0] = x[0] + z[0];
    };
    pr.diffusion = [](std::span<const double>, std::span<double> out) { out[0] = 1.0; };
    pr.running_cost = [](std::span<const double>, std::span<const double>) { return 0.0; };
    return pr;
}

}  // namespace

TEST_CASE("relaxed drift of a Dirac measure is the plain drift") {
    auto pr = shifted_drift_problem();
    Vec x{0.7};
    auto nu = RelaxedControl::dirac({0.3});
    REQUIRE(relaxed_drift(pr, x, nu)[0] == Catch::Approx(1.0));
}

TEST_CASE("relaxed drift of a symmetric mixture cancels for odd drift") {
    ControlProblem pr = shifted_drift_problem();
    pr.drift = [](std::span<const double>, std::span<const double> z, std::span<double> out) {
        out[0] = z[0];
    };
    pr.control_set = ControlSet::symmetric(1.0, 1);
    RelaxedControl nu({{{-1.0}, 0.5}, {{1.0}, 0.5}});
    REQUIRE(relaxed_drift(pr, Vec{0.0}, nu)[0] == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("relaxed drift weighted sum example") {
    auto pr = shifted_drift_problem();
    RelaxedControl nu({{{0.0}, 0.25}, {{2.0}, 0.75}});
    REQUIRE(relaxed_drift(pr, Vec{1.0}, nu)[0] == Catch::Approx(2.5));
}

TEST_CASE("relaxed drift input validation") {
    auto pr = shifted_drift_problem();
    REQUIRE_THROWS_AS(relaxed_drift(pr, Vec{0.0}, RelaxedControl{}), std::invalid_argument);
    REQUIRE_THROWS_AS(RelaxedControl({{{0.0}, 0.5}, {{1.0}, 0.6}}), std::invalid_argument);
    // atom outside the control set
    RelaxedControl bad({{{5.0}, 1.0}});
    REQUIRE_THROWS_AS(relaxed_drift(pr, Vec{0.0}, bad), std::invalid_argument);
}

TEST_CASE("relaxed drift is linear in the mixture weights") {
    auto pr = shifted_drift_problem();
    Vec x{0.4};
    RelaxedControl mu1({{{-1.0}, 0.3}, {{0.5}, 0.7}});
    RelaxedControl mu2({{{1.5}, 1.0}});
    const double lam = 0.35;
    RelaxedControl mix({{{-1.0}, lam * 0.3}, {{0.5}, lam * 0.7}, {{1.5}, 1.0 - lam}});
    const double lhs = relaxed_drift(pr, x, mix)[0];
    const double rhs =
        lam * relaxed_drift(pr, x, mu1)[0] + (1.0 - lam) * relaxed_drift(pr, x, mu2)[0];
    REQUIRE(lhs == Catch::Approx(rhs).margin(1e-12));
}

TEST_CASE("generator annihilates constants") {
    auto pr = shifted_drift_problem();
    ValueField f(RectGrid({Axis(-1, 1, 11)}), false, BoundaryKind::truncation);
    for (auto& v : f.values) v = 4.2;
    REQUIRE(apply_generator(pr, f, Vec{0.5}, 5) == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("generator is stencil-exact on quadratics: a=1/2, b=0, f=x^2") {
    ControlProblem pr = shifted_drift_problem();
    pr.drift = [](std::span<const double>, std::span<const double>, std::span<double> out) {
        out[0] = 0.0;
    };
    pr.diffusion = [](std::span<const double>, std::span<double> out) { out[0] = 1.0; };  // a = 1/2
    ValueField f(RectGrid({Axis(-2, 2, 21)}), false, BoundaryKind::truncation);
    for (std::int64_t i = 0; i < f.grid.num_nodes(); ++i) {
        const double x = f.grid.node(i)[0];
        f.at(i) = x * x;
    }
    REQUIRE(apply_generator(pr, f, Vec{0.0}, 10) == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("generator example: a=1, b=zeta=2, f=x^2 at x=3 gives 14") {
    ControlProblem pr;
    pr.dim_x = 1;
    pr.control_set = ControlSet::symmetric(3.0, 1);
    pr.drift = [](std::span<const double>, std::span<const double> z, std::span<double> out) {
        out[0] = z[0];
    };
    pr.diffusion = [](std::span<const double>, std::span<double> out) {
        out[0] = std::sqrt(2.0);  // a = 1
    };
    pr.running_cost = [](std::span<const double>, std::span<const double>) { return 0.0; };
    ValueField f(RectGrid({Axis(0, 6, 61)}), false, BoundaryKind::truncation);
    for (std::int64_t i = 0; i < f.grid.num_nodes(); ++i) {
        const double x = f.grid.node(i)[0];
        f.at(i) = x * x;
    }
    const std::int64_t node = f.grid.nearest_node(Vec{3.0});
    REQUIRE(apply_generator(pr, f, Vec{2.0}, node) == Catch::Approx(14.0).epsilon(1e-10));
}

TEST_CASE("generator rejects boundary nodes") {
    auto pr = shifted_drift_problem();
    ValueField f(RectGrid({Axis(-1, 1, 5)}), false, BoundaryKind::truncation);
    REQUIRE_THROWS_AS(apply_generator(pr, f, Vec{0.0}, 0), std::domain_error);
    REQUIRE_THROWS_AS(apply_generator(pr, f, Vec{0.0}, 4), std::domain_error);
}

TEST_CASE("generator is linear in the field") {
    auto pr = shifted_drift_problem();
    RectGrid g({Axis(-1, 1, 9)});
    ValueField f1(g, false, BoundaryKind::truncation), f2 = f1, combo = f1;
    for (std::int64_t i = 0; i < g.num_nodes(); ++i) {
        const double x = g.node(i)[0];
        f1.at(i) = std::sin(x);
        f2.at(i) = x * x * x;
        combo.at(i) = 2.0 * f1.at(i) - 0.5 * f2.at(i);
    }
    const double lhs = apply_generator(pr, combo, Vec{1.0}, 4);
    const double rhs = 2.0 * apply_generator(pr, f1, Vec{1.0}, 4) -
                       0.5 * apply_generator(pr, f2, Vec{1.0}, 4);
    REQUIRE(lhs == Catch::Approx(rhs).margin(1e-12));
}

TEST_CASE("cross-derivative terms handled for correlated diffusions") {
    // sigma = [[1, 0.5], [0, 1]] gives a with off-diagonal entries
    ControlProblem pr;
    pr.dim_x = 2;
    pr.control_set = ControlSet::singleton(0.0, 1);
    pr.drift = [](std::span<const double>, std::span<const double>, std::span<double> out) {
        out[0] = out[1] = 0.0;
    };
    pr.diffusion = [](std::span<const double>, std::span<double> out) {
        out[0] = 1.0; out[1] = 0.5;
        out[2] = 0.0; out[3] = 1.0;
    };
    pr.running_cost = [](std::span<const double>, std::span<const double>) { return 0.0; };

    RectGrid g({Axis(-1, 1, 9), Axis(-1, 1, 9)});
    ValueField f(g, false, BoundaryKind::truncation);
    for (std::int64_t i = 0; i < g.num_nodes(); ++i) {
        Vec x = g.node(i);
        f.at(i) = x[0] * x[1];  // d2/dxdy = 1, pure second derivatives vanish
    }
    // a = sigma sigma^T / 2 = [[0.625, 0.25], [0.25, 0.5]]; trace(a D2 f) = 2 a12 = 0.5
    std::vector<int> idx{4, 4};
    REQUIRE(apply_generator(pr, f, Vec{0.0}, g.flat(idx)) == Catch::Approx(0.5).epsilon(1e-10));
}
