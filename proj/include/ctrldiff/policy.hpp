#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "ctrldiff/control.hpp"
#include "ctrldiff/grid.hpp"
#include "ctrldiff/mollifier.hpp"
#include "ctrldiff/parallel.hpp"

namespace ctrldiff {

enum class Interpolation { nearest, multilinear };

/// Deterministic Markov policy sampled on a rectangular grid: one control per
/// node. Axis 0 is time for (time x state) Markov policies; otherwise the
/// policy is stationary. Immutable after construction.
class GridPolicy {
public:
    GridPolicy() = default;

    GridPolicy(RectGrid grid, bool has_time, ControlSet control_set, Vec values,
               Interpolation interp)
        : grid_(std::move(grid)),
          has_time_(has_time),
          control_set_(std::move(control_set)),
          values_(std::move(values)),
          interp_(interp) {
        const std::int64_t n = grid_.num_nodes();
        const int m = control_set_.dim();
        if (grid_.dim() > 8 || m > 4)
            throw std::invalid_argument("GridPolicy: supports at most 8 grid axes and 4 control axes");
        if (std::int64_t(values_.size()) != n * m)
            throw std::invalid_argument("GridPolicy: value array size mismatch");
        for (std::int64_t i = 0; i < n; ++i) {
            double* v = values_.data() + i * m;
            for (int c = 0; c < m; ++c) {
                if (v[c] < control_set_.lower[static_cast<size_t>(c)] - 1e-9 ||
                    v[c] > control_set_.upper[static_cast<size_t>(c)] + 1e-9)
                    throw std::invalid_argument("GridPolicy: node value outside the control set");
                v[c] = std::clamp(v[c], control_set_.lower[static_cast<size_t>(c)], control_set_.upper[static_cast<size_t>(c)]);
            }
        }
    }

    /// Builds a policy by evaluating fn(x or (t,x)) -> control at every node.
    template <class Fn>
    static GridPolicy from_function(RectGrid grid, bool has_time, ControlSet control_set, Fn&& fn,
                                    Interpolation interp = Interpolation::nearest) {
        const std::int64_t n = grid.num_nodes();
        const int m = control_set.dim();
        Vec vals(static_cast<size_t>(n * m));
        Vec x(static_cast<size_t>(grid.dim()));
        for (std::int64_t i = 0; i < n; ++i) {
            grid.node(i, x);
            Vec z = fn(x);
            for (int c = 0; c < m; ++c) vals[size_t(i * m + c)] = z[static_cast<size_t>(c)];
        }
        return GridPolicy(std::move(grid), has_time, std::move(control_set), std::move(vals), interp);
    }

    static GridPolicy constant(RectGrid grid, bool has_time, ControlSet control_set, const Vec& zeta,
                               Interpolation interp = Interpolation::nearest) {
        return from_function(std::move(grid), has_time, std::move(control_set),
                             [&zeta](const Vec&) { return zeta; }, interp);
    }

    const RectGrid& grid() const { return grid_; }
    bool has_time() const { return has_time_; }
    int spatial_dim() const { return grid_.dim() - (has_time_ ? 1 : 0); }
    int control_dim() const { return control_set_.dim(); }
    const ControlSet& control_set() const { return control_set_; }
    Interpolation interpolation() const { return interp_; }
    const Vec& values() const { return values_; }

    std::span<const double> value_at(std::int64_t node) const {
        return {values_.data() + node * control_dim(), size_t(control_dim())};
    }

    /// Control at an arbitrary point (time coordinate first when present).
    /// Points outside the grid box are clamped to it.
    void evaluate(std::span<const double> point, std::span<double> out) const {
        const int D = grid_.dim();
        const int m = control_dim();
        if (interp_ == Interpolation::nearest) {
            double clamped[8];
            for (int k = 0; k < D; ++k) clamped[k] = grid_.axis(k).clamp(point[k]);
            const std::int64_t f = grid_.nearest_node({clamped, static_cast<size_t>(D)});
            const double* v = values_.data() + f * m;
            for (int c = 0; c < m; ++c) out[c] = v[c];
            return;
        }
        // multilinear blend over the surrounding cell
        int base[8];
        double frac[8];
        for (int k = 0; k < D; ++k) {
            const Axis& ax = grid_.axis(k);
            const double x = ax.clamp(point[k]);
            if (ax.n == 1) {
                base[k] = 0;
                frac[k] = 0.0;
                continue;
            }
            double t = (x - ax.lo) / ax.spacing();
            int i = int(t);
            if (i > ax.n - 2) i = ax.n - 2;
            base[k] = i;
            frac[k] = std::clamp(t - double(i), 0.0, 1.0);
        }
        for (int c = 0; c < m; ++c) out[c] = 0.0;
        const int corners = 1 << D;
        int idx[8];
        for (int corner = 0; corner < corners; ++corner) {
            double w = 1.0;
            bool skip = false;
            for (int k = 0; k < D; ++k) {
                const bool up = (corner >> k) & 1;
                if (up && grid_.axis(k).n == 1) { skip = true; break; }
                w *= up ? frac[k] : 1.0 - frac[k];
                idx[k] = base[k] + (up ? 1 : 0);
            }
            if (skip || w == 0.0) continue;
            const double* v = values_.data() + grid_.flat({idx, static_cast<size_t>(D)}) * m;
            for (int c = 0; c < m; ++c) out[c] += w * v[c];
        }
        control_set_.project({out.data(), static_cast<size_t>(m)}, out);
    }

    Vec evaluate(const Vec& point) const {
        Vec out(static_cast<size_t>(control_dim()));
        evaluate(point, out);
        return out;
    }

    GridPolicy with_interpolation(Interpolation interp) const {
        GridPolicy p = *this;
        p.interp_ = interp;
        return p;
    }

    GridPolicy with_values(Vec values) const {
        return GridPolicy(grid_, has_time_, control_set_, std::move(values), interp_);
    }

private:
    RectGrid grid_;
    bool has_time_ = false;
    ControlSet control_set_;
    Vec values_;
    Interpolation interp_ = Interpolation::nearest;
};

struct MollifyResult {
    GridPolicy policy;
    bool under_resolved = false;  // kernel support below half the grid spacing
};

/// Discrete mollification: convolves node values with the bump kernel of
/// bandwidth eta > 0, renormalizing the truncated kernel near the box boundary
/// so every output is a convex combination of input values. Stationary
/// policies are smoothed in x; (time x state) policies use the product kernel
/// in (t, x). The summation pairs mirrored offsets so that symmetric inputs
/// on symmetric grids mollify bit-symmetrically.
inline MollifyResult mollify(const GridPolicy& policy, double eta, int workers = 0) {
    if (!(eta > 0.0)) throw std::invalid_argument("mollify: bandwidth must be positive");
    const RectGrid& g = policy.grid();
    const int D = g.dim();
    const int m = policy.control_dim();
    const int sd = policy.spatial_dim();
    const int t0 = policy.has_time() ? 1 : 0;

    double min_spacing = std::numeric_limits<double>::infinity();
    for (int k = 0; k < D; ++k)
        if (g.axis(k).n > 1) min_spacing = std::min(min_spacing, g.axis(k).spacing());
    if (std::isfinite(min_spacing) && eta < 0.5 * min_spacing)
        return {policy, true};

    // per-axis reach of the kernel in node steps
    std::vector<int> reach(static_cast<size_t>(D), 0);
    for (int k = 0; k < D; ++k) {
        const Axis& ax = g.axis(k);
        if (ax.n > 1) reach[static_cast<size_t>(k)] = std::min<int>(ax.n - 1, int(eta / ax.spacing()));
    }

    // canonical offset list: zero offset, then one representative per
    // mirrored pair (first nonzero component positive), lexicographic order
    std::vector<std::vector<int>> offsets;
    {
        std::vector<int> cur(static_cast<size_t>(D), 0);
        const std::int64_t total = [&] {
            std::int64_t t = 1;
            for (int k = 0; k < D; ++k) t *= 2 * reach[static_cast<size_t>(k)] + 1;
            return t;
        }();
        std::vector<int> off(static_cast<size_t>(D));
        for (std::int64_t e = 0; e < total; ++e) {
            std::int64_t r = e;
            bool canonical = false, zero = true;
            for (int k = 0; k < D; ++k) {
                const int span = 2 * reach[static_cast<size_t>(k)] + 1;
                off[static_cast<size_t>(k)] = int(r % span) - reach[static_cast<size_t>(k)];
                r /= span;
            }
            for (int k = 0; k < D; ++k) {
                if (off[static_cast<size_t>(k)] != 0) {
                    canonical = off[static_cast<size_t>(k)] > 0;
                    zero = false;
                    break;
                }
            }
            if (zero || canonical) offsets.push_back(off);
        }
        std::sort(offsets.begin(), offsets.end());
    }

    // kernel weight of a node offset (normalization cancels in the ratio)
    auto kernel_weight = [&](std::span<const int> off) -> double {
        double w = 1.0;
        if (t0) {
            const double dt = off[0] * g.axis(0).spacing() / eta;
            w *= Mollifier::profile(std::abs(dt));
        }
        double r2 = 0.0;
        for (int k = 0; k < sd; ++k) {
            const double dx = off[size_t(t0 + k)] * g.axis(t0 + k).spacing() / eta;
            r2 += dx * dx;
        }
        return w * Mollifier::profile(std::sqrt(r2));
    };
    std::vector<double> offset_weight(offsets.size());
    for (size_t i = 0; i < offsets.size(); ++i) offset_weight[i] = kernel_weight(offsets[i]);

    const std::int64_t n = g.num_nodes();
    Vec out(static_cast<size_t>(n) * static_cast<size_t>(m));
    const double* in = policy.values().data();

    parallel_for(n, workers, [&](std::int64_t node) {
        int idx[8];
        g.unflatten(node, {idx, static_cast<size_t>(D)});
        const double* vc = in + node * m;
        double num[4] = {0, 0, 0, 0};
        double den = 0.0;
        double cmin[4], cmax[4];
        for (int c = 0; c < m; ++c) cmin[c] = cmax[c] = vc[c];

        for (size_t oi = 0; oi < offsets.size(); ++oi) {
            const double w = offset_weight[oi];
            if (w == 0.0) continue;
            const auto& off = offsets[oi];
            // representative offset and its mirror
            for (int sgn = 0; sgn < 2; ++sgn) {
                bool inside = true, zero = true;
                std::int64_t nb = node;
                for (int k = 0; k < D; ++k) {
                    int o = off[static_cast<size_t>(k)];
                    if (o == 0) continue;
                    zero = false;
                    if (sgn) o = -o;
                    const int j = idx[k] + o;
                    if (j < 0 || j >= g.axis(k).n) {
                        inside = false;
                        break;
                    }
                    nb += g.stride(k) * o;
                }
                if (zero && sgn) break;  // the zero offset has no mirror
                if (!inside) {
                    continue;  // truncated near the boundary; renormalized below
                }
                den += w;
                if (!zero) {
                    const double* v = in + nb * m;
                    for (int c = 0; c < m; ++c) {
                        num[c] += w * (v[c] - vc[c]);
                        cmin[c] = std::min(cmin[c], v[c]);
                        cmax[c] = std::max(cmax[c], v[c]);
                    }
                }
            }
        }
        double* o = out.data() + node * m;
        for (int c = 0; c < m; ++c) {
            // anchored form: exact on locally constant values
            double val = vc[c] + num[c] / den;
            val = std::clamp(val, cmin[c], cmax[c]);
            o[c] = std::clamp(val, policy.control_set().lower[static_cast<size_t>(c)],
                              policy.control_set().upper[static_cast<size_t>(c)]);
        }
    });

    return {policy.with_values(std::move(out)), false};
}

/// Max difference quotient over adjacent node pairs: a lower bound on the
/// Lipschitz constant of the interpolant, tight along axes for multilinear
/// interpolation. Single-node axes are skipped.
inline double lipschitz_estimate(const GridPolicy& policy) {
    const RectGrid& g = policy.grid();
    const int D = g.dim();
    const int m = policy.control_dim();
    bool any_axis = false;
    for (int k = 0; k < D; ++k) any_axis = any_axis || g.axis(k).n >= 2;
    if (!any_axis) throw std::invalid_argument("lipschitz_estimate: need >= 2 nodes on some axis");

    double best = 0.0;
    int idx[8];
    const double* v = policy.values().data();
    for (std::int64_t node = 0; node < g.num_nodes(); ++node) {
        g.unflatten(node, {idx, static_cast<size_t>(D)});
        for (int k = 0; k < D; ++k) {
            if (g.axis(k).n < 2 || idx[k] + 1 >= g.axis(k).n) continue;
            const double* a = v + node * m;
            const double* b = v + (node + g.stride(k)) * m;
            double d2 = 0.0;
            for (int c = 0; c < m; ++c) {
                const double e = b[c] - a[c];
                d2 += e * e;
            }
            best = std::max(best, std::sqrt(d2) / g.axis(k).spacing());
        }
    }
    return best;
}

}  // namespace ctrldiff
