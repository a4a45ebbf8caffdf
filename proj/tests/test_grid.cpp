#include <catch2/catch_amalgamated.hpp>

#include "ctrldiff/grid.hpp"

using namespace ctrldiff;

TEST_CASE("axis coordinates hit endpoints and mirror exactly on symmetric spans") {
    Axis ax(-3.0, 3.0, 301);
    REQUIRE(ax.coord(0) == -3.0);
    REQUIRE(ax.coord(300) == 3.0);
    for (int i = 0; i <= 300; ++i) REQUIRE(ax.coord(300 - i) == -ax.coord(i));
}

TEST_CASE("flat/multi index round trip in row-major order") {
    RectGrid g({Axis(0, 1, 3), Axis(0, 1, 4), Axis(0, 1, 5)});
    REQUIRE(g.num_nodes() == 60);
    std::vector<int> idx(3);
    for (std::int64_t f = 0; f < g.num_nodes(); ++f) {
        g.unflatten(f, idx);
        REQUIRE(g.flat(idx) == f);
    }
    // last axis fastest
    g.unflatten(1, idx);
    REQUIRE(idx[2] == 1);
    REQUIRE(idx[0] == 0);
}

TEST_CASE("nearest node and clamping") {
    RectGrid g({Axis(-1, 1, 5)});  // spacing 0.5
    Vec x{0.3};
    REQUIRE(g.nearest_node(x) == 3);  // nodes -1,-0.5,0,0.5,1
    x[0] = 7.0;
    Vec c(1);
    g.clamp(x, c);
    REQUIRE(c[0] == 1.0);
    REQUIRE(g.node_nearest_origin() == 2);
}

TEST_CASE("degenerate single-node axis") {
    RectGrid g({Axis(0.0, 0.0, 1), Axis(-1, 1, 3)});
    REQUIRE(g.num_nodes() == 3);
    std::vector<int> idx{0, 2};
    REQUIRE(g.flat(idx) == 2);
    REQUIRE_FALSE(g.on_boundary(std::vector<int>{0, 1}));
}

TEST_CASE("trapezoid weights halve at the ends") {
    RectGrid g({Axis(0, 1, 5)});
    std::vector<int> idx{0};
    REQUIRE(trapezoid_weight(g, idx) == Catch::Approx(0.125));
    idx[0] = 2;
    REQUIRE(trapezoid_weight(g, idx) == Catch::Approx(0.25));
    // total equals the box measure
    double total = 0.0;
    for (int i = 0; i < 5; ++i) {
        idx[0] = i;
        total += trapezoid_weight(g, idx);
    }
    REQUIRE(total == Catch::Approx(1.0));
}

TEST_CASE("axis validation") {
    REQUIRE_THROWS_AS(Axis(1.0, 0.0, 2), std::invalid_argument);
    REQUIRE_THROWS_AS(Axis(0.0, 1.0, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(RectGrid(std::vector<Axis>{}), std::invalid_argument);
}
