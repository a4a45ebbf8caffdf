#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ctrldiff/parallel.hpp"
#include "ctrldiff/sim.hpp"

namespace ctrldiff {

/// Monte Carlo point estimate with provenance. Path-level work parallelizes
/// into per-path slots reduced in fixed order, so the result is bit-identical
/// for any worker count.
struct CostEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t paths = 0;
    std::uint64_t seed = 0;

    // diagnostics
    std::int64_t diverged_paths = 0;
    std::int64_t unexited_paths = 0;
    bool unreliable = false;       // > 1% of paths diverged / failed to exit
    bool nonstationary = false;    // ergodic two-window diagnostic tripped
    double tail_bound = 0.0;       // discounted: bound on the omitted tail
    bool tail_exceeds_tol = false;
    double window_gap = 0.0;       // ergodic: |first-half - second-half| average
};

namespace detail {

struct PathStats {
    CostEstimate finish(std::vector<double>& samples, const SimConfig& cfg) {
        CostEstimate est;
        est.paths = cfg.paths;
        est.seed = cfg.seed;
        // antithetic pairs count as one sample for the error estimate
        std::vector<double> eff;
        if (cfg.antithetic && samples.size() % 2 == 0) {
            eff.reserve(samples.size() / 2);
            for (size_t i = 0; i + 1 < samples.size(); i += 2)
                eff.push_back(0.5 * (samples[i] + samples[i + 1]));
        } else {
            eff = samples;
        }
        const std::int64_t n = std::int64_t(eff.size());
        est.mean = pairwise_sum(eff) / double(n);
        if (n > 1) {
            std::vector<double> sq(eff.size());
            for (size_t i = 0; i < eff.size(); ++i) {
                const double d = eff[i] - est.mean;
                sq[i] = d * d;
            }
            est.std_error = std::sqrt(pairwise_sum(sq) / (double(n) * double(n - 1)));
        }
        return est;
    }
};

}  // namespace detail

/// E[ integral_0^T c dt + c_T(X_T) ] by a left-endpoint Riemann sum.
inline CostEstimate estimate_finite_horizon(const ControlProblem& problem,
                                            const GridPolicy& policy, const Vec& x0,
                                            const SimConfig& cfg) {
    cfg.validate();
    if (!problem.horizon || !problem.terminal_cost)
        throw std::invalid_argument("estimate_finite_horizon: problem lacks horizon/terminal cost");
    SimConfig c = cfg;
    c.horizon = *problem.horizon;

    std::vector<double> samples(static_cast<size_t>(c.paths), 0.0);
    std::vector<std::uint8_t> diverged(static_cast<size_t>(c.paths), 0);
    parallel_for(c.paths, c.workers, [&](std::int64_t p) {
        double acc = 0.0;
        Vec xT(static_cast<size_t>(problem.dim_x));
        auto end = detail::run_path(problem, policy, x0, c, p, false,
                                    [&](std::int64_t, double, std::span<const double> x,
                                        std::span<const double> z, std::span<const double> xn) {
                                        acc += problem.running_cost(x, z) * c.dt;
                                        for (int i = 0; i < problem.dim_x; ++i) xT[static_cast<size_t>(i)] = xn[i];
                                        return true;
                                    });
        if (end.diverged) {
            diverged[static_cast<size_t>(p)] = 1;
            samples[static_cast<size_t>(p)] = acc;
        } else {
            samples[static_cast<size_t>(p)] = acc + problem.terminal_cost(xT);
        }
    });

    CostEstimate est = detail::PathStats{}.finish(samples, c);
    for (auto d : diverged) est.diverged_paths += d;
    est.unreliable = est.diverged_paths * 100 > c.paths;
    return est;
}

/// E[ integral_0^inf e^{-alpha t} c dt ], truncated at cfg.horizon with a
/// reported tail bound e^{-alpha T} sup(c) / alpha.
inline CostEstimate estimate_discounted(const ControlProblem& problem, const GridPolicy& policy,
                                        const Vec& x0, const SimConfig& cfg) {
    cfg.validate();
    if (!problem.discount || !(*problem.discount > 0.0))
        throw std::invalid_argument("estimate_discounted: problem lacks a positive discount");
    const double alpha = *problem.discount;

    std::vector<double> samples(static_cast<size_t>(cfg.paths), 0.0);
    std::vector<double> cmax(static_cast<size_t>(cfg.paths), 0.0);
    std::vector<std::uint8_t> diverged(static_cast<size_t>(cfg.paths), 0);
    parallel_for(cfg.paths, cfg.workers, [&](std::int64_t p) {
        double acc = 0.0, cm = 0.0;
        auto end = detail::run_path(problem, policy, x0, cfg, p, false,
                                    [&](std::int64_t k, double t, std::span<const double> x,
                                        std::span<const double> z, std::span<const double>) {
                                        (void)k;
                                        const double cv = problem.running_cost(x, z);
                                        cm = std::max(cm, cv);
                                        acc += std::exp(-alpha * t) * cv * cfg.dt;
                                        return true;
                                    });
        diverged[static_cast<size_t>(p)] = end.diverged;
        samples[static_cast<size_t>(p)] = acc;
        cmax[static_cast<size_t>(p)] = cm;
    });

    CostEstimate est = detail::PathStats{}.finish(samples, cfg);
    for (auto d : diverged) est.diverged_paths += d;
    est.unreliable = est.diverged_paths * 100 > cfg.paths;
    double sup_c = problem.cost_bound.value_or(0.0);
    for (double cm : cmax) sup_c = std::max(sup_c, cm);
    est.tail_bound = std::exp(-alpha * cfg.horizon) * sup_c / alpha;
    est.tail_exceeds_tol = est.tail_bound > cfg.tail_tol;
    return est;
}

/// Long-run average of the running cost after burn-in, with a two-window
/// stationarity diagnostic (first vs second half of the averaging window).
inline CostEstimate estimate_ergodic(const ControlProblem& problem, const GridPolicy& policy,
                                     const Vec& x0, const SimConfig& cfg) {
    cfg.validate();
    const std::int64_t nsteps = cfg.steps();
    const std::int64_t burn = std::int64_t(cfg.burn_in_frac * double(nsteps));
    if (burn >= nsteps) throw std::invalid_argument("estimate_ergodic: burn-in swallows the horizon");
    const std::int64_t mid = burn + (nsteps - burn) / 2;

    std::vector<double> samples(static_cast<size_t>(cfg.paths), 0.0);
    std::vector<double> first(static_cast<size_t>(cfg.paths), 0.0), second(static_cast<size_t>(cfg.paths), 0.0);
    std::vector<std::uint8_t> diverged(static_cast<size_t>(cfg.paths), 0);
    parallel_for(cfg.paths, cfg.workers, [&](std::int64_t p) {
        double acc1 = 0.0, acc2 = 0.0;
        std::int64_t n1 = 0, n2 = 0;
        auto end = detail::run_path(problem, policy, x0, cfg, p, false,
                                    [&](std::int64_t k, double, std::span<const double> x,
                                        std::span<const double> z, std::span<const double>) {
                                        if (k < burn) return true;
                                        const double cv = problem.running_cost(x, z);
                                        if (k < mid) {
                                            acc1 += cv;
                                            ++n1;
                                        } else {
                                            acc2 += cv;
                                            ++n2;
                                        }
                                        return true;
                                    });
        diverged[static_cast<size_t>(p)] = end.diverged;
        first[static_cast<size_t>(p)] = n1 ? acc1 / double(n1) : 0.0;
        second[static_cast<size_t>(p)] = n2 ? acc2 / double(n2) : 0.0;
        samples[static_cast<size_t>(p)] = (acc1 + acc2) / double(std::max<std::int64_t>(1, n1 + n2));
    });

    CostEstimate est = detail::PathStats{}.finish(samples, cfg);
    for (auto d : diverged) est.diverged_paths += d;
    est.unreliable = est.diverged_paths * 100 > cfg.paths;
    const double m1 = pairwise_sum(first) / double(cfg.paths);
    const double m2 = pairwise_sum(second) / double(cfg.paths);
    est.window_gap = std::abs(m1 - m2);
    est.nonstationary = est.std_error > 0.0 && est.window_gap > 5.0 * est.std_error;
    return est;
}

/// E[ integral_0^tau e^{-int delta} c dt + e^{-int delta} c_e(X_tau) ] for the
/// first exit from the problem's domain; paths still inside at the truncation
/// horizon contribute their accumulated running cost and are flagged.
inline CostEstimate estimate_exit(const ControlProblem& problem, const GridPolicy& policy,
                                  const Vec& x0, const SimConfig& cfg) {
    cfg.validate();
    if (!problem.exit_domain || !problem.exit_discount || !problem.exit_terminal)
        throw std::invalid_argument("estimate_exit: problem lacks exit domain/discount/terminal");
    if (!problem.exit_domain->contains(x0))
        throw std::invalid_argument("estimate_exit: x0 outside the exit domain");

    std::vector<double> samples(static_cast<size_t>(cfg.paths), 0.0);
    std::vector<std::uint8_t> unexited(static_cast<size_t>(cfg.paths), 0), diverged(static_cast<size_t>(cfg.paths), 0);
    parallel_for(cfg.paths, cfg.workers, [&](std::int64_t p) {
        double acc = 0.0, discount = 1.0;
        double last_c = 0.0, last_delta = 0.0;
        auto end = detail::run_path(problem, policy, x0, cfg, p, true,
                                    [&](std::int64_t, double, std::span<const double> x,
                                        std::span<const double> z, std::span<const double>) {
                                        last_c = problem.running_cost(x, z);
                                        last_delta = problem.exit_discount(x, z);
                                        acc += discount * last_c * cfg.dt;
                                        discount *= std::exp(-last_delta * cfg.dt);
                                        return true;
                                    });
        if (end.exited) {
            // rewind the final full step to its theta fraction
            const double full = std::exp(-last_delta * cfg.dt);
            const double part = std::exp(-last_delta * end.exit_theta * cfg.dt);
            discount /= full;
            acc -= discount * last_c * cfg.dt;
            acc += discount * last_c * end.exit_theta * cfg.dt;
            discount *= part;
            acc += discount * problem.exit_terminal(end.exit_state);
        } else if (end.diverged) {
            diverged[static_cast<size_t>(p)] = 1;
        } else {
            unexited[static_cast<size_t>(p)] = 1;  // lower bound only: running cost to truncation
        }
        samples[static_cast<size_t>(p)] = acc;
    });

    CostEstimate est = detail::PathStats{}.finish(samples, cfg);
    for (auto d : diverged) est.diverged_paths += d;
    for (auto u : unexited) est.unexited_paths += u;
    est.unreliable = (est.diverged_paths + est.unexited_paths) * 100 > cfg.paths;
    return est;
}

}  // namespace ctrldiff
