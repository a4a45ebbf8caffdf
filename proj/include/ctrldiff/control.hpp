#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ctrldiff/grid.hpp"

namespace ctrldiff {

/// Axis-aligned box representation of the compact convex control set.
struct ControlSet {
    Vec lower;
    Vec upper;

    ControlSet() = default;
    ControlSet(Vec lo, Vec hi) : lower(std::move(lo)), upper(std::move(hi)) {
        if (lower.size() != upper.size())
            throw std::invalid_argument("ControlSet: bound dimensions differ");
        for (size_t i = 0; i < lower.size(); ++i)
            if (lower[i] > upper[i]) throw std::invalid_argument("ControlSet: lower > upper");
    }
    static ControlSet symmetric(double radius, int m = 1) {
        return ControlSet(Vec(static_cast<size_t>(m), -radius), Vec(static_cast<size_t>(m), radius));
    }
    static ControlSet singleton(double value, int m = 1) {
        return ControlSet(Vec(static_cast<size_t>(m), value), Vec(static_cast<size_t>(m), value));
    }

    int dim() const { return int(lower.size()); }

    void project(std::span<const double> z, std::span<double> out) const {
        for (int i = 0; i < dim(); ++i) out[i] = std::clamp(z[i], lower[i], upper[i]);
    }
    Vec project(const Vec& z) const {
        Vec out(z.size());
        project(z, out);
        return out;
    }
    bool contains(std::span<const double> z, double tol = 0.0) const {
        for (int i = 0; i < dim(); ++i)
            if (z[i] < lower[i] - tol || z[i] > upper[i] + tol) return false;
        return true;
    }

    /// Uniform lattice with `per_axis` points per control axis, lexicographic order.
    std::vector<Vec> lattice(int per_axis) const {
        if (per_axis < 1) throw std::invalid_argument("ControlSet: lattice needs >= 1 point");
        std::vector<Axis> axes;
        axes.reserve(size_t(dim()));
        for (int i = 0; i < dim(); ++i)
            axes.emplace_back(lower[i], upper[i], upper[i] == lower[i] ? 1 : per_axis);
        RectGrid g(std::move(axes));
        std::vector<Vec> pts;
        pts.reserve(size_t(g.num_nodes()));
        for (std::int64_t f = 0; f < g.num_nodes(); ++f) pts.push_back(g.node(f));
        return pts;
    }
};

using DriftFn = std::function<void(std::span<const double> x, std::span<const double> zeta,
                                   std::span<double> out)>;
using DiffusionFn = std::function<void(std::span<const double> x, std::span<double> out_rowmajor)>;
using RunningCostFn = std::function<double(std::span<const double> x, std::span<const double> zeta)>;
using StateCostFn = std::function<double(std::span<const double> x)>;

struct Box {
    Vec lo;
    Vec hi;
    bool contains(std::span<const double> x) const {
        for (size_t k = 0; k < lo.size(); ++k)
            if (x[k] < lo[k] || x[k] > hi[k]) return false;
        return true;
    }
    /// Positive inside, zero on the boundary, negative outside.
    double signed_inset(std::span<const double> x) const {
        double s = std::numeric_limits<double>::infinity();
        for (size_t k = 0; k < lo.size(); ++k) s = std::min(s, std::min(x[k] - lo[k], hi[k] - x[k]));
        return s;
    }
};

/// A controlled-diffusion problem: dX = b(X, zeta) dt + sigma(X) dW with
/// running cost c >= 0 and the per-criterion extras that apply.
struct ControlProblem {
    int dim_x = 1;
    ControlSet control_set;
    DriftFn drift;
    DiffusionFn diffusion;       // sigma(x), d x d row-major
    RunningCostFn running_cost;  // c(x, zeta) >= 0

    // finite horizon
    std::optional<double> horizon;
    StateCostFn terminal_cost;  // c_T
    // discounted
    std::optional<double> discount;  // alpha
    // exit time
    std::optional<Box> exit_domain;   // O
    RunningCostFn exit_discount;      // delta(x, zeta) >= 0
    StateCostFn exit_terminal;        // c_e on the boundary of O
    // optional declared sup of c, used for discounted tail bounds
    std::optional<double> cost_bound;

    /// a(x) = sigma sigma^T / 2, written row-major into `out` (d x d).
    void diffusion_matrix(std::span<const double> x, std::span<double> out,
                          std::span<double> sigma_scratch) const {
        const int d = dim_x;
        diffusion(x, sigma_scratch);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double s = 0.0;
                for (int k = 0; k < d; ++k) s += sigma_scratch[size_t(i * d + k)] * sigma_scratch[size_t(j * d + k)];
                out[size_t(i * d + j)] = 0.5 * s;
            }
    }
};

/// Finite mixture of control atoms; the representable slice of relaxed controls.
struct RelaxedControl {
    struct Atom {
        Vec zeta;
        double weight;
    };
    std::vector<Atom> atoms;

    RelaxedControl() = default;
    explicit RelaxedControl(std::vector<Atom> a) : atoms(std::move(a)) {
        if (atoms.empty()) throw std::invalid_argument("RelaxedControl: empty atom list");
        double s = 0.0;
        for (const auto& at : atoms) {
            if (at.weight < -1e-12) throw std::invalid_argument("RelaxedControl: negative weight");
            s += at.weight;
        }
        if (std::abs(s - 1.0) > 1e-12)
            throw std::invalid_argument("RelaxedControl: weights must sum to 1");
    }

    static RelaxedControl dirac(Vec zeta) { return RelaxedControl({Atom{std::move(zeta), 1.0}}); }

    /// Sample an atom index from a unit uniform (inverse CDF in atom order).
    int sample(double u01) const {
        double acc = 0.0;
        for (size_t i = 0; i < atoms.size(); ++i) {
            acc += atoms[i].weight;
            if (u01 <= acc) return int(i);
        }
        return int(atoms.size()) - 1;
    }
};

/// Inf-compact Lyapunov pair (V, h) with constant C0 for the drift inequality
/// L_zeta V <= C0 - h.
struct LyapunovCertificate {
    StateCostFn V;      // > 1 at checked points
    RunningCostFn h;    // > 0 at checked points
    double C0 = 0.0;
};

}  // namespace ctrldiff
