#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctrldiff {

using Vec = std::vector<double>;

/// One uniformly spaced grid axis with n nodes on [lo, hi].
struct Axis {
    double lo = 0.0;
    double hi = 0.0;
    int n = 1;

    Axis() = default;
    Axis(double lo_, double hi_, int n_) : lo(lo_), hi(hi_), n(n_) {
        if (n < 1) throw std::invalid_argument("Axis: need at least one node");
        if (hi < lo) throw std::invalid_argument("Axis: hi < lo");
        if (n > 1 && hi == lo) throw std::invalid_argument("Axis: degenerate span with n > 1");
    }

    double spacing() const { return n > 1 ? (hi - lo) / (n - 1) : 0.0; }

    // Convex form keeps symmetric axes exactly symmetric in floating point:
    // coord(n-1-i) == -coord(i) whenever lo == -hi.
    double coord(int i) const {
        if (n == 1) return lo;
        return (lo * double(n - 1 - i) + hi * double(i)) / double(n - 1);
    }

    int nearest(double x) const {
        if (n == 1) return 0;
        double t = (x - lo) / spacing();
        int i = int(std::llround(t));
        return std::clamp(i, 0, n - 1);
    }

    double clamp(double x) const { return std::clamp(x, lo, hi); }
};

/// Rectangular uniform grid over a box, row-major flat indexing
/// (axis 0 slowest, last axis fastest).
class RectGrid {
public:
    RectGrid() = default;
    explicit RectGrid(std::vector<Axis> axes) : axes_(std::move(axes)) {
        if (axes_.empty()) throw std::invalid_argument("RectGrid: no axes");
        strides_.assign(axes_.size(), 1);
        for (int k = int(axes_.size()) - 2; k >= 0; --k)
            strides_[k] = strides_[k + 1] * std::int64_t(axes_[k + 1].n);
        num_nodes_ = strides_[0] * std::int64_t(axes_[0].n);
    }

    int dim() const { return int(axes_.size()); }
    std::int64_t num_nodes() const { return num_nodes_; }
    const Axis& axis(int k) const { return axes_[k]; }
    const std::vector<Axis>& axes() const { return axes_; }

    std::int64_t flat(std::span<const int> idx) const {
        std::int64_t f = 0;
        for (int k = 0; k < dim(); ++k) f += strides_[k] * std::int64_t(idx[k]);
        return f;
    }

    void unflatten(std::int64_t flat_idx, std::span<int> idx) const {
        for (int k = 0; k < dim(); ++k) {
            idx[k] = int(flat_idx / strides_[k]);
            flat_idx -= strides_[k] * std::int64_t(idx[k]);
        }
    }

    void node(std::int64_t flat_idx, std::span<double> out) const {
        for (int k = 0; k < dim(); ++k) {
            const int i = int(flat_idx / strides_[k]);
            flat_idx -= strides_[k] * std::int64_t(i);
            out[k] = axes_[k].coord(i);
        }
    }

    Vec node(std::int64_t flat_idx) const {
        Vec x(dim());
        node(flat_idx, x);
        return x;
    }

    std::int64_t stride(int k) const { return strides_[k]; }

    /// Flat index offset by one step along axis k; caller guarantees validity.
    std::int64_t neighbor(std::int64_t flat_idx, int k, int dir) const {
        return flat_idx + dir * strides_[k];
    }

    bool on_boundary(std::span<const int> idx) const {
        for (int k = 0; k < dim(); ++k)
            if (axes_[k].n > 1 && (idx[k] == 0 || idx[k] == axes_[k].n - 1)) return true;
        return false;
    }

    bool contains(std::span<const double> x) const {
        for (int k = 0; k < dim(); ++k)
            if (x[k] < axes_[k].lo || x[k] > axes_[k].hi) return false;
        return true;
    }

    void clamp(std::span<const double> x, std::span<double> out) const {
        for (int k = 0; k < dim(); ++k) out[k] = axes_[k].clamp(x[k]);
    }

    std::int64_t nearest_node(std::span<const double> x) const {
        std::int64_t f = 0;
        for (int k = 0; k < dim(); ++k) f += strides_[k] * std::int64_t(axes_[k].nearest(x[k]));
        return f;
    }

    /// Flat index of the node closest to the origin.
    std::int64_t node_nearest_origin() const {
        std::int64_t f = 0;
        for (int k = 0; k < dim(); ++k) f += strides_[k] * std::int64_t(axes_[k].nearest(0.0));
        return f;
    }

    bool same_layout(const RectGrid& o) const {
        if (dim() != o.dim()) return false;
        for (int k = 0; k < dim(); ++k) {
            const Axis &a = axes_[k], &b = o.axes_[k];
            if (a.n != b.n || a.lo != b.lo || a.hi != b.hi) return false;
        }
        return true;
    }

    std::string describe() const {
        std::string s;
        for (int k = 0; k < dim(); ++k) {
            if (k) s += " x ";
            s += "[" + std::to_string(axes_[k].lo) + "," + std::to_string(axes_[k].hi) + ";" +
                 std::to_string(axes_[k].n) + "]";
        }
        return s;
    }

private:
    std::vector<Axis> axes_;
    std::vector<std::int64_t> strides_;
    std::int64_t num_nodes_ = 0;
};

/// Trapezoidal quadrature weight of a grid node (product over axes).
inline double trapezoid_weight(const RectGrid& g, std::span<const int> idx) {
    double w = 1.0;
    for (int k = 0; k < g.dim(); ++k) {
        const Axis& ax = g.axis(k);
        if (ax.n == 1) continue;  // degenerate axis carries unit measure
        double wk = ax.spacing();
        if (idx[k] == 0 || idx[k] == ax.n - 1) wk *= 0.5;
        w *= wk;
    }
    return w;
}

}  // namespace ctrldiff
