#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctrldiff/control.hpp"
#include "ctrldiff/grid.hpp"
#include "ctrldiff/parallel.hpp"
#include "ctrldiff/policy.hpp"

namespace ctrldiff {

/// Monotone upwind discretization of the controlled generator on a box grid:
/// centered second differences for the diffusion (sign-split corner stencils
/// for cross terms), drift-direction first-order differences for b . grad.
/// At a truncation boundary the normal diffusion term is extrapolated away
/// and outward drift transitions degrade to the node itself, so every weight
/// stays nonnegative. Dirichlet nodes are pinned and never updated.
///
/// All sweeps are Jacobi-style over a node-major table, so updates
/// parallelize deterministically.
class UpwindOperator {
public:
    /// One table column per control sample (lexicographic lattice order).
    static UpwindOperator for_controls(const ControlProblem& pr, const RectGrid& g,
                                       const std::vector<Vec>& controls, bool exit_mode) {
        if (controls.empty()) throw std::invalid_argument("UpwindOperator: no control samples");
        UpwindOperator op(pr, g, int(controls.size()), exit_mode);
        Vec zeta;
        for (std::int64_t i = 0; i < op.n_; ++i)
            for (int j = 0; j < op.nj_; ++j) op.fill_column(pr, g, i, j, controls[static_cast<size_t>(j)]);
        op.finalize();
        return op;
    }

    /// One column holding the policy's own control at each node; `time` feeds
    /// (time x state) policies.
    static UpwindOperator for_policy(const ControlProblem& pr, const RectGrid& g,
                                     const GridPolicy& pol, bool exit_mode, double time = 0.0) {
        UpwindOperator op(pr, g, 1, exit_mode);
        const int d = g.dim();
        Vec x(static_cast<size_t>(d)), point(static_cast<size_t>(d) + 1), zeta(size_t(pol.control_dim()));
        for (std::int64_t i = 0; i < op.n_; ++i) {
            g.node(i, x);
            if (pol.has_time()) {
                point[0] = time;
                for (int k = 0; k < d; ++k) point[size_t(k + 1)] = x[static_cast<size_t>(k)];
                pol.evaluate({point.data(), size_t(d + 1)}, zeta);
            } else {
                pol.evaluate(x, zeta);
            }
            op.fill_column(pr, g, i, 0, zeta);
        }
        op.finalize();
        return op;
    }

    std::int64_t nodes() const { return n_; }
    int ncontrols() const { return nj_; }
    int dim() const { return d_; }
    const std::vector<std::uint8_t>& pinned() const { return pinned_; }
    std::vector<std::uint8_t>& pinned_mutable() { return pinned_; }

    /// Largest explicit step keeping 1 - dt (W + delta) >= 0 at every
    /// (node, control); the CFL-type monotonicity bound.
    double stable_dt() const { return 1.0 / max_outflow_; }

    /// H_i(V) = min over the node's controls of [L V - delta V + c]_i; pinned
    /// nodes report 0.
    void hamiltonian(const Vec& V, Vec& out, int workers = 0) const {
        apply(V, out, nullptr, workers);
    }

    /// target_i = V_i + dt H_i(V); pinned nodes copy V_i. Monotone in V
    /// whenever dt <= stable_dt().
    void bellman_target(const Vec& V, double dt, Vec& out, int workers = 0) const {
        apply(V, out, &dt, workers);
    }

    /// Per-node argmin column index (first minimum, i.e. lexicographically
    /// smallest control on ties).
    void argmin(const Vec& V, std::vector<int>& out, int workers = 0) const {
        out.assign(static_cast<size_t>(n_), 0);
        parallel_for(n_, workers, [&](std::int64_t i) { out[static_cast<size_t>(i)] = best_column(V, i); });
    }

private:
    UpwindOperator(const ControlProblem& pr, const RectGrid& g, int nj, bool exit_mode)
        : d_(g.dim()), n_(g.num_nodes()), nj_(nj), exit_mode_(exit_mode), grid_(g) {
        wp_.assign(static_cast<size_t>(d_) * static_cast<size_t>(n_) * static_cast<size_t>(nj_), 0.0);
        wm_.assign(static_cast<size_t>(d_) * static_cast<size_t>(n_) * static_cast<size_t>(nj_), 0.0);
        outflow_.assign(static_cast<size_t>(n_) * static_cast<size_t>(nj_), 0.0);
        cost_.assign(static_cast<size_t>(n_) * static_cast<size_t>(nj_), 0.0);
        if (exit_mode_) delta_.assign(static_cast<size_t>(n_) * static_cast<size_t>(nj_), 0.0);
        up_.assign(static_cast<size_t>(d_) * static_cast<size_t>(n_), 0);
        dn_.assign(static_cast<size_t>(d_) * static_cast<size_t>(n_), 0);
        pinned_.assign(static_cast<size_t>(n_), 0);

        std::vector<int> idx(static_cast<size_t>(d_));
        for (std::int64_t i = 0; i < n_; ++i) {
            g.unflatten(i, idx);
            for (int k = 0; k < d_; ++k) {
                const bool lo = idx[static_cast<size_t>(k)] == 0;
                const bool hi = idx[static_cast<size_t>(k)] == g.axis(k).n - 1;
                up_[static_cast<size_t>(k) * static_cast<size_t>(n_) + static_cast<size_t>(i)] = hi ? i : g.neighbor(i, k, +1);
                dn_[static_cast<size_t>(k) * static_cast<size_t>(n_) + static_cast<size_t>(i)] = lo ? i : g.neighbor(i, k, -1);
            }
            if (exit_mode_ && g.on_boundary(idx)) pinned_[static_cast<size_t>(i)] = 1;
        }
        (void)pr;
    }

    void fill_column(const ControlProblem& pr, const RectGrid& g, std::int64_t i, int j,
                     const Vec& zeta) {
        const int d = d_;
        thread_local Vec x, a, sig, b;
        x.resize(static_cast<size_t>(d));
        a.resize(static_cast<size_t>(d) * static_cast<size_t>(d));
        sig.resize(static_cast<size_t>(d) * static_cast<size_t>(d));
        b.resize(static_cast<size_t>(d));
        g.node(i, x);
        pr.diffusion_matrix(x, a, sig);
        pr.drift(x, zeta, b);

        thread_local std::vector<int> idx;
        idx.resize(static_cast<size_t>(d));
        g.unflatten(i, idx);

        double W = 0.0;
        for (int k = 0; k < d; ++k) {
            const Axis& ax = g.axis(k);
            const bool lo = idx[static_cast<size_t>(k)] == 0, hi = idx[static_cast<size_t>(k)] == ax.n - 1;
            const double h = ax.spacing();
            double wp = 0.0, wm = 0.0;
            if (ax.n >= 2 && !lo && !hi) {
                const double diff = a[size_t(k * d + k)] / (h * h);
                wp += diff;
                wm += diff;
                // corner deductions for cross derivatives
                for (int l = 0; l < d; ++l) {
                    if (l == k) continue;
                    const bool l_interior =
                        idx[static_cast<size_t>(l)] > 0 && idx[static_cast<size_t>(l)] < g.axis(l).n - 1;
                    if (!l_interior) continue;
                    const double akl = a[size_t(k * d + l)];
                    if (akl == 0.0) continue;
                    const double ded = std::abs(akl) / (h * g.axis(l).spacing());
                    wp -= ded;
                    wm -= ded;
                }
                if (wp < -1e-12 || wm < -1e-12)
                    throw std::runtime_error(
                        "UpwindOperator: non-monotone stencil (diffusion not diagonally "
                        "dominant) at node " + std::to_string(i));
                wp = std::max(wp, 0.0);
                wm = std::max(wm, 0.0);
            }
            if (ax.n >= 2) {
                const double bk = b[static_cast<size_t>(k)];
                if (bk > 0.0 && !hi) wp += bk / h;
                if (bk < 0.0 && !lo) wm += -bk / h;
            }
            wp_at(k, i, j) = wp;
            wm_at(k, i, j) = wm;
            W += wp + wm;
        }

        // sign-split corner weights: (+k+l) and (-k-l) carry a_kl^+,
        // (+k-l) and (-k+l) carry a_kl^-
        if (!cross_pairs_.empty() || has_any_cross(a, d)) {
            ensure_cross_storage();
            int pair_idx = 0;
            for (int k = 0; k < d; ++k)
                for (int l = k + 1; l < d; ++l, ++pair_idx) {
                    const bool interior =
                        idx[static_cast<size_t>(k)] > 0 && idx[static_cast<size_t>(k)] < g.axis(k).n - 1 &&
                        idx[static_cast<size_t>(l)] > 0 && idx[static_cast<size_t>(l)] < g.axis(l).n - 1;
                    const double akl = interior ? a[size_t(k * d + l)] : 0.0;
                    const double hk = g.axis(k).spacing(), hl = g.axis(l).spacing();
                    const double wsame = akl > 0.0 ? akl / (hk * hl) : 0.0;
                    const double wanti = akl < 0.0 ? -akl / (hk * hl) : 0.0;
                    cross_at(pair_idx, 0, i, j) = wsame;  // +k+l and -k-l
                    cross_at(pair_idx, 1, i, j) = wanti;  // +k-l and -k+l
                    W += 2.0 * (wsame + wanti);
                }
        }

        outflow_at(i, j) = W;
        cost_at(i, j) = pr.running_cost(x, zeta);
        if (exit_mode_) {
            if (!pr.exit_discount)
                throw std::invalid_argument("UpwindOperator: exit mode needs an exit discount");
            delta_[static_cast<size_t>(i) * static_cast<size_t>(nj_) + static_cast<size_t>(j)] = pr.exit_discount(x, zeta);
        }
    }

    static bool has_any_cross(const Vec& a, int d) {
        for (int k = 0; k < d; ++k)
            for (int l = k + 1; l < d; ++l)
                if (a[size_t(k * d + l)] != 0.0) return true;
        return false;
    }

    void ensure_cross_storage() {
        if (!cross_pairs_.empty()) return;
        for (int k = 0; k < d_; ++k)
            for (int l = k + 1; l < d_; ++l) cross_pairs_.push_back({k, l});
        cross_.assign(cross_pairs_.size() * 2 * static_cast<size_t>(n_) * static_cast<size_t>(nj_), 0.0);
    }

    void finalize() {
        max_outflow_ = 0.0;
        for (std::int64_t i = 0; i < n_; ++i) {
            if (pinned_[static_cast<size_t>(i)]) continue;
            for (int j = 0; j < nj_; ++j) {
                double w = outflow_at(i, j);
                if (exit_mode_) w += delta_[static_cast<size_t>(i) * static_cast<size_t>(nj_) + static_cast<size_t>(j)];
                max_outflow_ = std::max(max_outflow_, w);
            }
        }
        if (max_outflow_ <= 0.0) max_outflow_ = 1.0;
    }

    int best_column(const Vec& V, std::int64_t i) const {
        int best = 0;
        double bestv = column_value(V, i, 0);
        for (int j = 1; j < nj_; ++j) {
            const double v = column_value(V, i, j);
            if (v < bestv) {
                bestv = v;
                best = j;
            }
        }
        return best;
    }

    // [L V - delta V + c] at node i under column j
    double column_value(const Vec& V, std::int64_t i, int j) const {
        const double vi = V[static_cast<size_t>(i)];
        double s = cost_at_c(i, j) - outflow_at_c(i, j) * vi;
        for (int k = 0; k < d_; ++k) {
            s += wp_at_c(k, i, j) * V[size_t(up_[static_cast<size_t>(k) * static_cast<size_t>(n_) + static_cast<size_t>(i)])];
            s += wm_at_c(k, i, j) * V[size_t(dn_[static_cast<size_t>(k) * static_cast<size_t>(n_) + static_cast<size_t>(i)])];
        }
        if (!cross_.empty()) {
            for (size_t p = 0; p < cross_pairs_.size(); ++p) {
                const auto [k, l] = cross_pairs_[p];
                const double wsame = cross_at_c(int(p), 0, i, j);
                const double wanti = cross_at_c(int(p), 1, i, j);
                if (wsame != 0.0) {
                    s += wsame * (V[size_t(grid_.neighbor(grid_.neighbor(i, k, +1), l, +1))] +
                                  V[size_t(grid_.neighbor(grid_.neighbor(i, k, -1), l, -1))]);
                }
                if (wanti != 0.0) {
                    s += wanti * (V[size_t(grid_.neighbor(grid_.neighbor(i, k, +1), l, -1))] +
                                  V[size_t(grid_.neighbor(grid_.neighbor(i, k, -1), l, +1))]);
                }
            }
        }
        if (!delta_.empty()) s -= delta_[static_cast<size_t>(i) * static_cast<size_t>(nj_) + static_cast<size_t>(j)] * vi;
        return s;
    }

    void apply(const Vec& V, Vec& out, const double* dt, int workers) const {
        out.resize(static_cast<size_t>(n_));
        parallel_for(n_, workers, [&](std::int64_t i) {
            if (pinned_[static_cast<size_t>(i)]) {
                out[static_cast<size_t>(i)] = dt ? V[static_cast<size_t>(i)] : 0.0;
                return;
            }
            double h = column_value(V, i, 0);
            for (int j = 1; j < nj_; ++j) h = std::min(h, column_value(V, i, j));
            out[static_cast<size_t>(i)] = dt ? V[static_cast<size_t>(i)] + *dt * h : h;
        });
    }

    double& wp_at(int k, std::int64_t i, int j) {
        return wp_[(static_cast<size_t>(k) * static_cast<size_t>(n_) + static_cast<size_t>(i)) * static_cast<size_t>(nj_) + static_cast<size_t>(j)];
    }
    double& wm_at(int k, std::int64_t i, int j) {
        return wm_[(static_cast<size_t>(k) * static_cast<size_t>(n_) + static_cast<size_t>(i)) * static_cast<size_t>(nj_) + static_cast<size_t>(j)];
    }
    double wp_at_c(int k, std::int64_t i, int j) const {
        return wp_[(static_cast<size_t>(k) * static_cast<size_t>(n_) + static_cast<size_t>(i)) * static_cast<size_t>(nj_) + static_cast<size_t>(j)];
    }
    double wm_at_c(int k, std::int64_t i, int j) const {
        return wm_[(static_cast<size_t>(k) * static_cast<size_t>(n_) + static_cast<size_t>(i)) * static_cast<size_t>(nj_) + static_cast<size_t>(j)];
    }
    double& outflow_at(std::int64_t i, int j) { return outflow_[static_cast<size_t>(i) * static_cast<size_t>(nj_) + static_cast<size_t>(j)]; }
    double outflow_at_c(std::int64_t i, int j) const {
        return outflow_[static_cast<size_t>(i) * static_cast<size_t>(nj_) + static_cast<size_t>(j)];
    }
    double& cost_at(std::int64_t i, int j) { return cost_[static_cast<size_t>(i) * static_cast<size_t>(nj_) + static_cast<size_t>(j)]; }
    double cost_at_c(std::int64_t i, int j) const {
        return cost_[static_cast<size_t>(i) * static_cast<size_t>(nj_) + static_cast<size_t>(j)];
    }
    double& cross_at(int pair, int kind, std::int64_t i, int j) {
        return cross_[((static_cast<size_t>(pair) * 2 + static_cast<size_t>(kind)) * static_cast<size_t>(n_) + static_cast<size_t>(i)) * static_cast<size_t>(nj_) +
                      static_cast<size_t>(j)];
    }
    double cross_at_c(int pair, int kind, std::int64_t i, int j) const {
        return cross_[((static_cast<size_t>(pair) * 2 + static_cast<size_t>(kind)) * static_cast<size_t>(n_) + static_cast<size_t>(i)) * static_cast<size_t>(nj_) +
                      static_cast<size_t>(j)];
    }

    int d_;
    std::int64_t n_;
    int nj_;
    bool exit_mode_;
    RectGrid grid_;
    std::vector<double> wp_, wm_, cross_, outflow_, cost_, delta_;
    std::vector<std::int64_t> up_, dn_;
    std::vector<std::pair<int, int>> cross_pairs_;
    std::vector<std::uint8_t> pinned_;
    double max_outflow_ = 1.0;
};

}  // namespace ctrldiff
