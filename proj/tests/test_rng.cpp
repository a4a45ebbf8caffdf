#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "ctrldiff/parallel.hpp"
#include "ctrldiff/rng.hpp"

using namespace ctrldiff;

TEST_CASE("identical (seed, path, step, block) keys reproduce draws exactly") {
    CounterRng a(1234), b(1234);
    for (int k = 0; k < 100; ++k) {
        auto za = a.normal_pair(7, std::uint32_t(k), 0);
        auto zb = b.normal_pair(7, std::uint32_t(k), 0);
        REQUIRE(za[0] == zb[0]);
        REQUIRE(za[1] == zb[1]);
    }
}

TEST_CASE("different coordinates decorrelate the stream") {
    CounterRng rng(99);
    auto base = rng.normal_pair(0, 0, 0);
    REQUIRE(rng.normal_pair(1, 0, 0)[0] != base[0]);
    REQUIRE(rng.normal_pair(0, 1, 0)[0] != base[0]);
    REQUIRE(rng.normal_pair(0, 0, 1)[0] != base[0]);
    REQUIRE(CounterRng(100).normal_pair(0, 0, 0)[0] != base[0]);
}

TEST_CASE("uniform draws live in a disjoint block namespace") {
    CounterRng rng(5);
    // uniforms must not collide with any plausible normal block index
    const double u = rng.uniform(3, 17, 0);
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    auto z = rng.normal_pair(3, 17, 0);
    REQUIRE(std::isfinite(z[0]));
}

TEST_CASE("normal moments at statistical resolution") {
    CounterRng rng(2024);
    const int n = 200000;
    double s = 0.0, s2 = 0.0, s4 = 0.0;
    for (int i = 0; i < n / 2; ++i) {
        auto z = rng.normal_pair(std::uint64_t(i), 0, 0);
        for (double v : {z[0], z[1]}) {
            s += v;
            s2 += v * v;
            s4 += v * v * v * v;
        }
    }
    REQUIRE(std::abs(s / n) < 0.01);
    REQUIRE(s2 / n == Catch::Approx(1.0).margin(0.02));
    REQUIRE(s4 / n == Catch::Approx(3.0).margin(0.1));
}

TEST_CASE("derive produces distinct child seeds") {
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i) seen.insert(CounterRng::derive(42, std::uint64_t(i)));
    REQUIRE(seen.size() == 1000);
}

TEST_CASE("pairwise_sum matches plain summation") {
    std::vector<double> v(1001);
    for (size_t i = 0; i < v.size(); ++i) v[i] = std::sin(double(i));
    double plain = 0.0;
    for (double x : v) plain += x;
    REQUIRE(pairwise_sum(v) == Catch::Approx(plain).epsilon(1e-12));
}

TEST_CASE("parallel_for writes disjoint slots identically for any worker count") {
    std::vector<double> a(977), b(977);
    auto body = [](std::vector<double>& out) {
        return [&out](std::int64_t i) { out[size_t(i)] = std::sqrt(double(i)) * 1.000000001; };
    };
    parallel_for(std::int64_t(a.size()), 1, body(a));
    parallel_for(std::int64_t(b.size()), 5, body(b));
    REQUIRE(a == b);
}
