#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ctrldiff/grid.hpp"

namespace ctrldiff {

enum class BoundaryKind {
    dirichlet,   // fixed boundary values (exit problems)
    truncation,  // artificial box boundary: reflecting / one-sided differences
    terminal,    // parabolic field; terminal slice pinned to c_T
};

/// Scalar samples on a rectangular grid, optionally with a leading time axis.
struct ValueField {
    RectGrid grid;       // axis 0 is time when has_time
    bool has_time = false;
    Vec values;          // one value per node, row-major
    BoundaryKind boundary = BoundaryKind::truncation;

    ValueField() = default;
    ValueField(RectGrid g, bool time, BoundaryKind b)
        : grid(std::move(g)), has_time(time), values(size_t(grid.num_nodes()), 0.0), boundary(b) {}

    int spatial_dim() const { return grid.dim() - (has_time ? 1 : 0); }

    std::int64_t space_nodes() const {
        return has_time ? grid.num_nodes() / grid.axis(0).n : grid.num_nodes();
    }

    double& at(std::int64_t flat) { return values[static_cast<size_t>(flat)]; }
    double at(std::int64_t flat) const { return values[static_cast<size_t>(flat)]; }

    /// Flat index into a time slice (has_time only).
    std::int64_t slice_offset(int time_index) const {
        return std::int64_t(time_index) * space_nodes();
    }

    /// Multilinear interpolation at a point (time coordinate first if present);
    /// the point is clamped to the grid box.
    double interpolate(std::span<const double> point) const {
        const int D = grid.dim();
        if (int(point.size()) != D) throw std::invalid_argument("ValueField: point dim mismatch");
        std::vector<int> base(static_cast<size_t>(D));
        std::vector<double> frac(static_cast<size_t>(D));
        for (int k = 0; k < D; ++k) {
            const Axis& ax = grid.axis(k);
            double x = ax.clamp(point[k]);
            if (ax.n == 1) {
                base[static_cast<size_t>(k)] = 0;
                frac[static_cast<size_t>(k)] = 0.0;
                continue;
            }
            double t = (x - ax.lo) / ax.spacing();
            int i = int(t);
            if (i > ax.n - 2) i = ax.n - 2;
            base[static_cast<size_t>(k)] = i;
            frac[static_cast<size_t>(k)] = std::clamp(t - i, 0.0, 1.0);
        }
        double acc = 0.0;
        const int corners = 1 << D;
        std::vector<int> idx(static_cast<size_t>(D));
        for (int c = 0; c < corners; ++c) {
            double w = 1.0;
            for (int k = 0; k < D; ++k) {
                const bool up = (c >> k) & 1;
                const double f = frac[static_cast<size_t>(k)];
                if (up && grid.axis(k).n == 1) { w = 0.0; break; }
                w *= up ? f : 1.0 - f;
                idx[static_cast<size_t>(k)] = base[static_cast<size_t>(k)] + (up ? 1 : 0);
            }
            if (w != 0.0) acc += w * values[size_t(grid.flat(idx))];
        }
        return acc;
    }
};

}  // namespace ctrldiff
