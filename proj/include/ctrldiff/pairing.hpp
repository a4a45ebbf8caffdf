#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "ctrldiff/policy.hpp"

namespace ctrldiff {

using TestFn = std::function<double(std::span<const double> x)>;
using PairFn = std::function<double(std::span<const double> x, std::span<const double> zeta)>;

/// A finite dictionary of (f, g) test pairs standing in for the full family
/// quantified over in the control topology: f integrable on the grid box,
/// g bounded continuous on (state, control).
struct PairingDictionary {
    struct Entry {
        TestFn f;
        PairFn g;
        double g_bound = 1.0;  // declared sup of |g|
        std::string name;
    };
    std::vector<Entry> entries;

    bool empty() const { return entries.empty(); }
    size_t size() const { return entries.size(); }
};

/// Trapezoidal quadrature of integral f(x) g(x, v(x)) dx over the policy's
/// grid box; (time x state) policies integrate over both axes.
inline double borkar_pairing(const GridPolicy& policy, const TestFn& f, const PairFn& g) {
    const RectGrid& grid = policy.grid();
    const int D = grid.dim();
    double acc = 0.0;
    std::vector<int> idx(static_cast<size_t>(D));
    Vec x(static_cast<size_t>(D));
    for (std::int64_t node = 0; node < grid.num_nodes(); ++node) {
        grid.unflatten(node, idx);
        grid.node(node, x);
        const double w = trapezoid_weight(grid, idx);
        acc += w * f(x) * g(x, policy.value_at(node));
    }
    return acc;
}

/// Finite-dictionary surrogate for convergence in the control topology:
/// the max pairing discrepancy over the dictionary.
inline double pairing_gap(const GridPolicy& a, const GridPolicy& b,
                          const PairingDictionary& dict) {
    if (dict.empty()) throw std::invalid_argument("pairing_gap: empty dictionary");
    double worst = 0.0;
    for (const auto& e : dict.entries)
        worst = std::max(worst, std::abs(borkar_pairing(a, e.f, e.g) - borkar_pairing(b, e.f, e.g)));
    return worst;
}

/// Default 6-pair dictionary on a spatial box of half-width L: f drawn from
/// {Gaussian, hat, sine-windowed} and g from {zeta_1, zeta_1^2,
/// smooth-window(x) zeta_1}. Policies with a time axis get the same pairs
/// lifted by a smooth time window.
inline PairingDictionary default_dictionary(double half_width, bool has_time = false,
                                            double horizon = 1.0) {
    const double L = half_width;
    const int t0 = has_time ? 1 : 0;

    auto window_t = [has_time, horizon](std::span<const double> x) {
        if (!has_time) return 1.0;
        const double s = std::clamp(x[0] / horizon, 0.0, 1.0);
        return std::sin(std::numbers::pi * s);  // vanishes at both ends of [0, T]
    };
    auto r2 = [t0](std::span<const double> x) {
        double s = 0.0;
        for (size_t k = static_cast<size_t>(t0); k < x.size(); ++k) s += x[k] * x[k];
        return s;
    };
    auto r1 = [t0](std::span<const double> x) {
        double s = 0.0;
        for (size_t k = static_cast<size_t>(t0); k < x.size(); ++k) s += std::abs(x[k]);
        return s;
    };

    TestFn gauss = [=](std::span<const double> x) { return window_t(x) * std::exp(-r2(x)); };
    TestFn hat = [=](std::span<const double> x) {
        return window_t(x) * std::max(0.0, 1.0 - r1(x) / L);
    };
    TestFn sinewin = [=](std::span<const double> x) {
        double p = window_t(x);
        for (size_t k = static_cast<size_t>(t0); k < x.size(); ++k)
            p *= std::sin(std::numbers::pi * x[k] / L) * std::cos(0.5 * std::numbers::pi * x[k] / L);
        return p;
    };

    PairFn g_lin = [](std::span<const double>, std::span<const double> z) { return z[0]; };
    PairFn g_sq = [](std::span<const double>, std::span<const double> z) { return z[0] * z[0]; };
    PairFn g_win = [=](std::span<const double> x, std::span<const double> z) {
        return std::exp(-r2(x) / 4.0) * z[0];
    };

    PairingDictionary d;
    d.entries.push_back({gauss, g_lin, 1.0, "gauss*zeta"});
    d.entries.push_back({gauss, g_sq, 1.0, "gauss*zeta^2"});
    d.entries.push_back({hat, g_lin, 1.0, "hat*zeta"});
    d.entries.push_back({hat, g_sq, 1.0, "hat*zeta^2"});
    d.entries.push_back({sinewin, g_lin, 1.0, "sinewin*zeta"});
    d.entries.push_back({sinewin, g_win, 1.0, "sinewin*window*zeta"});
    return d;
}

}  // namespace ctrldiff
