#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "ctrldiff/control.hpp"
#include "ctrldiff/value_field.hpp"

namespace ctrldiff {

/// b(x, nu) for a finite-mixture relaxed control: sum_i w_i b(x, zeta_i).
inline Vec relaxed_drift(const ControlProblem& problem, std::span<const double> x,
                         const RelaxedControl& nu) {
    if (nu.atoms.empty()) throw std::invalid_argument("relaxed_drift: empty atom list");
    const int d = problem.dim_x;
    Vec out(static_cast<size_t>(d), 0.0), b(static_cast<size_t>(d));
    for (const auto& atom : nu.atoms) {
        if (!problem.control_set.contains(atom.zeta, 1e-12))
            throw std::invalid_argument("relaxed_drift: atom outside the control set");
        problem.drift(x, atom.zeta, b);
        for (int k = 0; k < d; ++k) out[static_cast<size_t>(k)] += atom.weight * b[static_cast<size_t>(k)];
    }
    return out;
}

/// Controlled generator applied to grid samples of f at an interior node:
/// trace(a(x) D2 f) + b(x, zeta) . Df with second-order central differences.
/// Stencil-exact on per-axis quadratics when a and b are constant.
inline double apply_generator(const ControlProblem& problem, const ValueField& f,
                              std::span<const double> zeta, std::int64_t node) {
    if (f.has_time)
        throw std::invalid_argument("apply_generator: field must be purely spatial");
    const RectGrid& g = f.grid;
    const int d = g.dim();
    if (d != problem.dim_x) throw std::invalid_argument("apply_generator: grid/problem dim mismatch");

    std::vector<int> idx(static_cast<size_t>(d));
    g.unflatten(node, idx);
    for (int k = 0; k < d; ++k)
        if (idx[static_cast<size_t>(k)] <= 0 || idx[static_cast<size_t>(k)] >= g.axis(k).n - 1)
            throw std::domain_error("apply_generator: node is on or outside the grid boundary");

    Vec x = g.node(node);
    Vec a(static_cast<size_t>(d) * static_cast<size_t>(d)), sigma_scratch(static_cast<size_t>(d) * static_cast<size_t>(d)), b(static_cast<size_t>(d));
    problem.diffusion_matrix(x, a, sigma_scratch);
    problem.drift(x, zeta, b);

    const double fc = f.at(node);
    double acc = 0.0;
    for (int k = 0; k < d; ++k) {
        const double h = g.axis(k).spacing();
        const double fp = f.at(g.neighbor(node, k, +1));
        const double fm = f.at(g.neighbor(node, k, -1));
        acc += a[size_t(k * d + k)] * (fp - 2.0 * fc + fm) / (h * h);
        acc += b[static_cast<size_t>(k)] * (fp - fm) / (2.0 * h);
    }
    // centered cross second derivatives
    for (int k = 0; k < d; ++k)
        for (int l = k + 1; l < d; ++l) {
            const double akl = a[size_t(k * d + l)];
            if (akl == 0.0) continue;
            const double hk = g.axis(k).spacing(), hl = g.axis(l).spacing();
            const double fpp = f.at(g.neighbor(g.neighbor(node, k, +1), l, +1));
            const double fpm = f.at(g.neighbor(g.neighbor(node, k, +1), l, -1));
            const double fmp = f.at(g.neighbor(g.neighbor(node, k, -1), l, +1));
            const double fmm = f.at(g.neighbor(g.neighbor(node, k, -1), l, -1));
            acc += 2.0 * akl * (fpp - fpm - fmp + fmm) / (4.0 * hk * hl);
        }
    return acc;
}

}  // namespace ctrldiff
