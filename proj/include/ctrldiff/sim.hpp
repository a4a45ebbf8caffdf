#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ctrldiff/control.hpp"
#include "ctrldiff/policy.hpp"
#include "ctrldiff/rng.hpp"

namespace ctrldiff {

struct SimConfig {
    double dt = 1e-3;
    double horizon = 1.0;     // horizon, or truncation time for infinite-horizon criteria
    std::int64_t paths = 1;
    std::uint64_t seed = 0;
    bool antithetic = false;
    double blowup_guard = 1e6;    // |X| beyond this flags the path as diverged
    double burn_in_frac = 0.2;    // ergodic criterion
    double tail_tol = 1e-3;       // discounted truncation target
    bool exit_bridge = true;      // Brownian-bridge crossing test between steps
    int workers = 0;

    void validate() const {
        if (!(dt > 0.0)) throw std::invalid_argument("SimConfig: dt must be positive");
        if (!(horizon > 0.0)) throw std::invalid_argument("SimConfig: horizon must be positive");
        if (paths < 1) throw std::invalid_argument("SimConfig: need at least one path");
    }

    std::int64_t steps() const { return std::int64_t(std::ceil(horizon / dt - 1e-12)); }
};

struct Trajectory {
    Vec times;                  // starts at 0, uniform dt
    Vec states;                 // (steps+1) x d row-major
    Vec controls;               // steps x m (control applied over [t_k, t_{k+1}))
    std::optional<double> exit_time;
    Vec exit_state;
    bool diverged = false;
    int dim = 1;

    std::int64_t num_states() const { return std::int64_t(times.size()); }
    std::span<const double> state(std::int64_t k) const {
        return {states.data() + k * dim, static_cast<size_t>(dim)};
    }
};

namespace detail {

struct PathEnd {
    bool exited = false;
    double exit_time = 0.0;
    double exit_theta = 0.0;  // fraction of the final step
    Vec exit_state;
    bool diverged = false;
    std::int64_t steps_taken = 0;
};

/// One Euler-Maruyama path: X_{k+1} = X_k + b dt + sigma sqrt(dt) xi_k, with
/// normals from the counter stream keyed by (seed, path, step). The visitor
/// sees every step before the state advances:
///   on_step(step k, t_k, x_k, zeta_k, x_{k+1}) -> bool keep_going.
/// When track_exit is set, the domain-membership sign change is refined by a
/// linear-in-time crossing estimate; cfg.exit_bridge additionally applies the
/// Brownian-bridge crossing test to steps whose endpoints are both inside.
template <class OnStep>
PathEnd run_path(const ControlProblem& problem, const GridPolicy& policy,
                 std::span<const double> x0, const SimConfig& cfg, std::int64_t path_index,
                 bool track_exit, OnStep&& on_step) {
    const int d = problem.dim_x;
    const int m = problem.control_set.dim();
    const CounterRng rng(cfg.seed);

    const std::uint64_t stream = cfg.antithetic ? std::uint64_t(path_index) / 2
                                                : std::uint64_t(path_index);
    const double sign = cfg.antithetic && (path_index & 1) ? -1.0 : 1.0;

    Vec x(x0.begin(), x0.end()), xn(static_cast<size_t>(d));
    Vec b(static_cast<size_t>(d)), sigma(static_cast<size_t>(d) * static_cast<size_t>(d)), zeta(static_cast<size_t>(m));
    Vec point(static_cast<size_t>(d) + 1);
    const double sdt = std::sqrt(cfg.dt);
    const std::int64_t nsteps = cfg.steps();

    PathEnd end;
    const Box* domain = track_exit && problem.exit_domain ? &*problem.exit_domain : nullptr;
    double inset = domain ? domain->signed_inset(x) : 0.0;

    for (std::int64_t k = 0; k < nsteps; ++k) {
        const double t = double(k) * cfg.dt;
        if (policy.has_time()) {
            point[0] = t;
            for (int j = 0; j < d; ++j) point[size_t(j + 1)] = x[static_cast<size_t>(j)];
            policy.evaluate({point.data(), size_t(d + 1)}, zeta);
        } else {
            policy.evaluate({x.data(), static_cast<size_t>(d)}, zeta);
        }

        problem.drift(x, zeta, b);
        problem.diffusion(x, sigma);
        for (int i = 0; i < d; ++i) xn[static_cast<size_t>(i)] = x[static_cast<size_t>(i)] + b[static_cast<size_t>(i)] * cfg.dt;
        for (int pair = 0; pair < (d + 1) / 2; ++pair) {
            const auto z = rng.normal_pair(stream, std::uint32_t(k), std::uint32_t(pair));
            for (int half = 0; half < 2; ++half) {
                const int j = 2 * pair + half;
                if (j >= d) break;
                const double xi = sign * z[static_cast<size_t>(half)];
                for (int i = 0; i < d; ++i)
                    xn[static_cast<size_t>(i)] += sigma[size_t(i * d + j)] * sdt * xi;
            }
        }

        if (!on_step(k, t, std::span<const double>(x), std::span<const double>(zeta),
                     std::span<const double>(xn))) {
            end.steps_taken = k + 1;
            return end;
        }

        if (domain) {
            const double inset_next = domain->signed_inset(xn);
            bool hit = false;
            double theta = 1.0;
            if (inset_next <= 0.0) {
                theta = inset > 0.0 ? inset / (inset - inset_next) : 0.0;
                hit = true;
            } else if (cfg.exit_bridge) {
                // Brownian-bridge crossing probability per box face, using the
                // per-coordinate step variance v_i = sum_j sigma_ij^2 dt
                double p_keep = 1.0;
                for (int i = 0; i < d; ++i) {
                    double vi = 0.0;
                    for (int j = 0; j < d; ++j) {
                        const double s = sigma[size_t(i * d + j)];
                        vi += s * s;
                    }
                    vi *= cfg.dt;
                    if (vi <= 0.0) continue;
                    const double d0l = x[static_cast<size_t>(i)] - domain->lo[static_cast<size_t>(i)];
                    const double d1l = xn[static_cast<size_t>(i)] - domain->lo[static_cast<size_t>(i)];
                    const double d0h = domain->hi[static_cast<size_t>(i)] - x[static_cast<size_t>(i)];
                    const double d1h = domain->hi[static_cast<size_t>(i)] - xn[static_cast<size_t>(i)];
                    p_keep *= 1.0 - std::exp(-2.0 * d0l * d1l / vi);
                    p_keep *= 1.0 - std::exp(-2.0 * d0h * d1h / vi);
                }
                if (p_keep < 1.0) {
                    const double u = rng.uniform(stream, std::uint32_t(k), 0);
                    if (u > p_keep) {
                        hit = true;
                        theta = 0.5;  // expected crossing instant is mid-step to O(dt)
                    }
                }
            }
            if (hit) {
                end.exited = true;
                end.exit_theta = theta;
                end.exit_time = (double(k) + theta) * cfg.dt;
                end.exit_state.resize(static_cast<size_t>(d));
                for (int i = 0; i < d; ++i)
                    end.exit_state[static_cast<size_t>(i)] =
                        x[static_cast<size_t>(i)] + theta * (xn[static_cast<size_t>(i)] - x[static_cast<size_t>(i)]);
                end.steps_taken = k + 1;
                return end;
            }
            inset = inset_next;
        }

        double nrm2 = 0.0;
        for (int i = 0; i < d; ++i) nrm2 += xn[static_cast<size_t>(i)] * xn[static_cast<size_t>(i)];
        if (!(nrm2 < cfg.blowup_guard * cfg.blowup_guard)) {
            end.diverged = true;
            end.steps_taken = k + 1;
            return end;
        }
        x.swap(xn);
    }
    end.steps_taken = nsteps;
    return end;
}

}  // namespace detail

/// Simulates one full trajectory (path index selects the random stream).
inline Trajectory simulate(const ControlProblem& problem, const GridPolicy& policy,
                           const Vec& x0, const SimConfig& cfg, std::int64_t path_index = 0) {
    cfg.validate();
    const int d = problem.dim_x;
    const int m = problem.control_set.dim();
    if (int(x0.size()) != d) throw std::invalid_argument("simulate: x0 dimension mismatch");

    Trajectory traj;
    traj.dim = d;
    traj.times.push_back(0.0);
    traj.states.insert(traj.states.end(), x0.begin(), x0.end());

    auto end = detail::run_path(
        problem, policy, x0, cfg, path_index, problem.exit_domain.has_value(),
        [&](std::int64_t k, double, std::span<const double>, std::span<const double> zeta,
            std::span<const double> xn) {
            traj.controls.insert(traj.controls.end(), zeta.begin(), zeta.end());
            traj.times.push_back(double(k + 1) * cfg.dt);
            traj.states.insert(traj.states.end(), xn.begin(), xn.end());
            return true;
        });

    traj.diverged = end.diverged;
    if (end.exited) {
        traj.exit_time = end.exit_time;
        traj.exit_state = end.exit_state;
        // drop the record past the crossing; the stored tail is the interpolant
        traj.times.back() = end.exit_time;
        for (int i = 0; i < d; ++i)
            traj.states[traj.states.size() - static_cast<size_t>(d) + static_cast<size_t>(i)] = end.exit_state[static_cast<size_t>(i)];
    }
    (void)m;
    return traj;
}

}  // namespace ctrldiff
