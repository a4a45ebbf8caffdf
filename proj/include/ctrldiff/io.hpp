#pragma once

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ctrldiff/policy.hpp"
#include "ctrldiff/sim.hpp"
#include "ctrldiff/value_field.hpp"

namespace ctrldiff {

/// All numeric serialization uses %.17g so that parsing recovers every double
/// bit-exactly.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

inline void write_axes(std::ostream& os, const RectGrid& g) {
    for (int k = 0; k < g.dim(); ++k)
        os << ' ' << format_double(g.axis(k).lo) << ' ' << format_double(g.axis(k).hi) << ' '
           << g.axis(k).n << ' ' << format_double(g.axis(k).spacing());
}

inline RectGrid read_axes(std::istream& is, int dim) {
    std::vector<Axis> axes;
    for (int k = 0; k < dim; ++k) {
        double lo, hi, h;
        int n;
        if (!(is >> lo >> hi >> n >> h)) throw std::runtime_error("policy/field header truncated");
        axes.emplace_back(lo, hi, n);
        if (n > 1 && std::abs(axes.back().spacing() - h) > 1e-12 * std::max(1.0, std::abs(h)))
            throw std::runtime_error("policy/field header: inconsistent spacing");
    }
    return RectGrid(std::move(axes));
}

}  // namespace detail

/// Flat text format: one header line (dims, bounds, spacings, interpolation),
/// then one node value per line in row-major order.
inline void save_policy(const GridPolicy& p, std::ostream& os) {
    os << "ctrldiff-policy 1 " << (p.has_time() ? 1 : 0) << ' ' << p.grid().dim() << ' '
       << p.control_dim() << ' '
       << (p.interpolation() == Interpolation::nearest ? "nearest" : "multilinear");
    detail::write_axes(os, p.grid());
    for (int c = 0; c < p.control_dim(); ++c)
        os << ' ' << format_double(p.control_set().lower[static_cast<size_t>(c)]) << ' '
           << format_double(p.control_set().upper[static_cast<size_t>(c)]);
    os << '\n';
    const int m = p.control_dim();
    for (std::int64_t i = 0; i < p.grid().num_nodes(); ++i) {
        auto v = p.value_at(i);
        for (int c = 0; c < m; ++c) os << (c ? " " : "") << format_double(v[static_cast<size_t>(c)]);
        os << '\n';
    }
}

inline GridPolicy load_policy(std::istream& is) {
    std::string magic;
    int version, has_time, dim, m;
    std::string interp;
    if (!(is >> magic >> version >> has_time >> dim >> m >> interp) ||
        magic != "ctrldiff-policy" || version != 1)
        throw std::runtime_error("load_policy: not a ctrldiff-policy v1 file");
    RectGrid grid = detail::read_axes(is, dim);
    Vec lo(static_cast<size_t>(m)), hi(static_cast<size_t>(m));
    for (int c = 0; c < m; ++c)
        if (!(is >> lo[static_cast<size_t>(c)] >> hi[static_cast<size_t>(c)]))
            throw std::runtime_error("load_policy: control set bounds truncated");
    Vec vals(static_cast<size_t>(grid.num_nodes()) * static_cast<size_t>(m));
    for (auto& v : vals)
        if (!(is >> v)) throw std::runtime_error("load_policy: node values truncated");
    return GridPolicy(std::move(grid), has_time != 0, ControlSet(std::move(lo), std::move(hi)),
                      std::move(vals),
                      interp == "nearest" ? Interpolation::nearest : Interpolation::multilinear);
}

inline void save_field(const ValueField& f, std::ostream& os) {
    const char* bk = f.boundary == BoundaryKind::dirichlet ? "dirichlet"
                     : f.boundary == BoundaryKind::terminal ? "terminal"
                                                            : "truncation";
    os << "ctrldiff-field 1 " << (f.has_time ? 1 : 0) << ' ' << f.grid.dim() << ' ' << bk;
    detail::write_axes(os, f.grid);
    os << '\n';
    for (double v : f.values) os << format_double(v) << '\n';
}

inline ValueField load_field(std::istream& is) {
    std::string magic, bk;
    int version, has_time, dim;
    if (!(is >> magic >> version >> has_time >> dim >> bk) || magic != "ctrldiff-field" ||
        version != 1)
        throw std::runtime_error("load_field: not a ctrldiff-field v1 file");
    BoundaryKind kind = bk == "dirichlet" ? BoundaryKind::dirichlet
                        : bk == "terminal" ? BoundaryKind::terminal
                                           : BoundaryKind::truncation;
    ValueField f(detail::read_axes(is, dim), has_time != 0, kind);
    for (auto& v : f.values)
        if (!(is >> v)) throw std::runtime_error("load_field: values truncated");
    return f;
}

/// CSV export for plotting: coordinates then values, one node per row.
inline void export_policy_csv(const GridPolicy& p, std::ostream& os) {
    const int D = p.grid().dim();
    const int t0 = p.has_time() ? 1 : 0;
    if (t0) os << "t,";
    for (int k = 0; k < D - t0; ++k) os << "x" << (k + 1) << ',';
    for (int c = 0; c < p.control_dim(); ++c) os << "u" << (c + 1) << (c + 1 < p.control_dim() ? "," : "");
    os << '\n';
    Vec x(static_cast<size_t>(D));
    for (std::int64_t i = 0; i < p.grid().num_nodes(); ++i) {
        p.grid().node(i, x);
        for (int k = 0; k < D; ++k) os << format_double(x[static_cast<size_t>(k)]) << ',';
        auto v = p.value_at(i);
        for (int c = 0; c < p.control_dim(); ++c)
            os << format_double(v[static_cast<size_t>(c)]) << (c + 1 < p.control_dim() ? "," : "");
        os << '\n';
    }
}

inline void export_field_csv(const ValueField& f, std::ostream& os) {
    const int D = f.grid.dim();
    const int t0 = f.has_time ? 1 : 0;
    if (t0) os << "t,";
    for (int k = 0; k < D - t0; ++k) os << "x" << (k + 1) << ',';
    os << "value\n";
    Vec x(static_cast<size_t>(D));
    for (std::int64_t i = 0; i < f.grid.num_nodes(); ++i) {
        f.grid.node(i, x);
        for (int k = 0; k < D; ++k) os << format_double(x[static_cast<size_t>(k)]) << ',';
        os << format_double(f.values[static_cast<size_t>(i)]) << '\n';
    }
}

inline void export_residuals_csv(const std::vector<double>& residuals, std::ostream& os) {
    os << "iteration,residual\n";
    for (size_t i = 0; i < residuals.size(); ++i)
        os << i << ',' << format_double(residuals[i]) << '\n';
}

/// One trajectory per file: t, x_1..x_d, u_1..u_m rows.
inline void export_trajectory_csv(const Trajectory& traj, int control_dim, std::ostream& os) {
    os << "t";
    for (int k = 0; k < traj.dim; ++k) os << ",x" << (k + 1);
    for (int c = 0; c < control_dim; ++c) os << ",u" << (c + 1);
    os << '\n';
    for (std::int64_t k = 0; k < traj.num_states(); ++k) {
        os << format_double(traj.times[static_cast<size_t>(k)]);
        for (int i = 0; i < traj.dim; ++i)
            os << ',' << format_double(traj.states[size_t(k * traj.dim + i)]);
        if (k + 1 < traj.num_states())
            for (int c = 0; c < control_dim; ++c)
                os << ',' << format_double(traj.controls[size_t(k * control_dim + c)]);
        os << '\n';
    }
}

inline void save_file(const std::string& path, const std::function<void(std::ostream&)>& writer) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    writer(os);
}

}  // namespace ctrldiff
