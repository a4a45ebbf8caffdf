#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctrldiff/upwind.hpp"
#include "ctrldiff/value_field.hpp"

namespace ctrldiff {

enum class Criterion { finite_horizon, discounted, ergodic, exit_time };

inline const char* to_string(Criterion c) {
    switch (c) {
        case Criterion::finite_horizon: return "finite_horizon";
        case Criterion::discounted: return "discounted";
        case Criterion::ergodic: return "ergodic";
        default: return "exit";
    }
}

struct SolverConfig {
    std::vector<Vec> control_samples;   // empty: uniform lattice below
    int control_points_per_axis = 33;
    double tolerance = 1e-7;            // sup-norm stopping threshold (residual scale)
    std::int64_t max_iters = 400000;
    double time_step = 0.0;             // parabolic explicit step; 0 = auto (CFL bound)
    int time_slices = 51;               // stored slices of a finite-horizon field
    int exit_nodes_per_axis = 201;      // grid over the exit domain
    std::int64_t anchor_node = -1;      // ergodic normalization; -1 = node nearest origin
    int workers = 0;

    std::vector<Vec> controls_for(const ControlSet& u) const {
        if (!control_samples.empty()) {
            for (const auto& z : control_samples)
                if (!u.contains(z, 1e-12))
                    throw std::invalid_argument("SolverConfig: control sample outside the set");
            return control_samples;
        }
        return u.lattice(control_points_per_axis);
    }
};

class SolverFailure : public std::runtime_error {
public:
    SolverFailure(const std::string& what, std::vector<double> residual_history)
        : std::runtime_error(what), residuals(std::move(residual_history)) {}
    std::vector<double> residuals;
};

struct SolveDiagnostics {
    std::int64_t iterations = 0;
    bool converged = false;
    double dt_eff = 0.0;
    std::vector<double> residual_history;  // sup-norm residual per sweep
};

struct SolveResult {
    ValueField field;
    SolveDiagnostics diag;
};

struct ErgodicSolution {
    ValueField V;
    double rho = 0.0;
    SolveDiagnostics diag;
};

struct PolicyEvaluation {
    ValueField field;
    std::optional<double> rho;  // ergodic criterion only
    SolveDiagnostics diag;
};

namespace detail {

inline double sup_abs(const Vec& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

/// Semi-implicit value iteration for min[LV + c] = alpha V. Each sweep is
/// V <- [V + dt min(LV + c)] / (1 + alpha dt), a sup-norm contraction with
/// factor 1/(1 + alpha dt); stopping at residual <= tol * alpha bounds the
/// iteration error by tol.
inline SolveDiagnostics discounted_iteration(const UpwindOperator& op, double alpha, Vec& V,
                                             double tol, std::int64_t max_iters, int workers) {
    SolveDiagnostics diag;
    const double dt = op.stable_dt();
    diag.dt_eff = dt;
    Vec target(V.size());
    for (std::int64_t it = 0; it < max_iters; ++it) {
        op.bellman_target(V, dt, target, workers);
        double resid = 0.0;
        for (size_t i = 0; i < V.size(); ++i)
            resid = std::max(resid, std::abs((target[i] - V[i]) / dt - alpha * V[i]));
        diag.residual_history.push_back(resid);
        for (size_t i = 0; i < V.size(); ++i) target[i] /= 1.0 + alpha * dt;
        V.swap(target);
        diag.iterations = it + 1;
        if (resid <= tol * alpha) {
            diag.converged = true;
            return diag;
        }
    }
    return diag;
}

/// Explicit fixed point for Dirichlet problems min[LV - delta V + c] = 0;
/// pinned boundary rows never change.
inline SolveDiagnostics dirichlet_iteration(const UpwindOperator& op, Vec& V, double tol,
                                            std::int64_t max_iters, int workers) {
    SolveDiagnostics diag;
    const double dt = op.stable_dt();
    diag.dt_eff = dt;
    Vec target(V.size());
    for (std::int64_t it = 0; it < max_iters; ++it) {
        op.bellman_target(V, dt, target, workers);
        double resid = 0.0;
        for (size_t i = 0; i < V.size(); ++i)
            resid = std::max(resid, std::abs(target[i] - V[i]) / dt);
        diag.residual_history.push_back(resid);
        V.swap(target);
        diag.iterations = it + 1;
        if (resid <= tol) {
            diag.converged = true;
            return diag;
        }
    }
    return diag;
}

/// Relative value iteration: V <- S(V) - S(V)[anchor] with
/// S(V) = V + dt min[LV + c]; rho is the anchor-node Bellman residual. The
/// sandwich bound |rho - rho*| <= sup |min[LV+c] - rho| drives the stop rule.
inline SolveDiagnostics rvi_iteration(const UpwindOperator& op, std::int64_t anchor, Vec& V,
                                      double& rho, double tol, std::int64_t max_iters,
                                      int workers) {
    SolveDiagnostics diag;
    const double dt = op.stable_dt();
    diag.dt_eff = dt;
    Vec target(V.size());
    rho = 0.0;
    for (std::int64_t it = 0; it < max_iters; ++it) {
        op.bellman_target(V, dt, target, workers);
        const double rho_new = (target[static_cast<size_t>(anchor)] - V[static_cast<size_t>(anchor)]) / dt;
        double resid = 0.0;
        for (size_t i = 0; i < V.size(); ++i)
            resid = std::max(resid, std::abs((target[i] - V[i]) / dt - rho_new));
        diag.residual_history.push_back(resid);
        const double shift = target[static_cast<size_t>(anchor)];
        for (size_t i = 0; i < V.size(); ++i) target[i] -= shift;
        V.swap(target);
        rho = rho_new;
        diag.iterations = it + 1;
        if (resid <= tol) {
            diag.converged = true;
            return diag;
        }
    }
    return diag;
}

inline std::int64_t resolve_anchor(const RectGrid& g, std::int64_t requested) {
    if (requested >= 0 && requested < g.num_nodes()) return requested;
    return g.node_nearest_origin();
}

/// Backward explicit march of dpsi/dt + H(psi) = 0 from the terminal slice,
/// recording `slices` uniformly spaced time slices. `hamiltonian(t, psi, out)`
/// supplies H at time t (rebuilt per step for time-dependent policies).
template <class HamFn>
ValueField parabolic_march(const RectGrid& space, double horizon, const StateCostFn& terminal,
                           double dt_request, double dt_stable, int slices, HamFn&& hamiltonian) {
    if (slices < 2) throw std::invalid_argument("parabolic march: need >= 2 time slices");
    if (dt_request > 0.0 && dt_request > dt_stable * (1.0 + 1e-12))
        throw std::invalid_argument(
            "parabolic march: explicit time step violates the CFL/monotonicity bound (dt <= " +
            std::to_string(dt_stable) + ")");
    const double dt0 = dt_request > 0.0 ? dt_request : dt_stable;
    const int per_slice = std::max<int>(1, int(std::ceil(horizon / (dt0 * (slices - 1)) - 1e-12)));
    const std::int64_t nsteps = std::int64_t(per_slice) * (slices - 1);
    const double dt = horizon / double(nsteps);

    std::vector<Axis> axes;
    axes.emplace_back(0.0, horizon, slices);
    for (int k = 0; k < space.dim(); ++k) axes.push_back(space.axis(k));
    ValueField out(RectGrid(std::move(axes)), true, BoundaryKind::terminal);

    const std::int64_t sn = space.num_nodes();
    Vec psi(static_cast<size_t>(sn)), ham(static_cast<size_t>(sn)), x(size_t(space.dim()));
    for (std::int64_t i = 0; i < sn; ++i) {
        space.node(i, x);
        psi[static_cast<size_t>(i)] = terminal(x);
    }
    // terminal slice is the exact terminal cost
    std::copy(psi.begin(), psi.end(), out.values.begin() + out.slice_offset(slices - 1));

    for (std::int64_t s = nsteps; s > 0; --s) {
        const double t = double(s) * dt;  // marching from t to t - dt
        hamiltonian(t, psi, ham);
        for (std::int64_t i = 0; i < sn; ++i) psi[static_cast<size_t>(i)] += dt * ham[static_cast<size_t>(i)];
        if ((s - 1) % per_slice == 0) {
            const int slice = int((s - 1) / per_slice);
            std::copy(psi.begin(), psi.end(), out.values.begin() + out.slice_offset(slice));
        }
    }
    return out;
}

}  // namespace detail

/// Backward-in-time monotone solve of the finite-horizon equation
/// dpsi/dt + min_zeta [L psi + c] = 0, psi(T, .) = c_T.
inline SolveResult solve_finite_horizon(const ControlProblem& problem, const RectGrid& grid,
                                        const SolverConfig& cfg) {
    if (!problem.horizon || !problem.terminal_cost)
        throw std::invalid_argument("solve_finite_horizon: problem lacks horizon/terminal cost");
    const auto controls = cfg.controls_for(problem.control_set);
    const auto op = UpwindOperator::for_controls(problem, grid, controls, false);

    SolveDiagnostics diag;
    diag.dt_eff = op.stable_dt();
    ValueField field = detail::parabolic_march(
        grid, *problem.horizon, problem.terminal_cost, cfg.time_step, op.stable_dt(),
        cfg.time_slices,
        [&](double, const Vec& psi, Vec& ham) { op.hamiltonian(psi, ham, cfg.workers); });
    diag.converged = true;
    diag.iterations = cfg.time_slices;
    return {std::move(field), std::move(diag)};
}

/// Value iteration for the discounted equation min_zeta [LV + c] = alpha V on
/// a truncated box (reflecting/one-sided artificial boundary).
inline SolveResult solve_discounted(const ControlProblem& problem, const RectGrid& grid,
                                    const SolverConfig& cfg) {
    if (!problem.discount || !(*problem.discount > 0.0))
        throw std::invalid_argument("solve_discounted: problem lacks a positive discount");
    const auto controls = cfg.controls_for(problem.control_set);
    const auto op = UpwindOperator::for_controls(problem, grid, controls, false);

    ValueField field(grid, false, BoundaryKind::truncation);
    auto diag = detail::discounted_iteration(op, *problem.discount, field.values, cfg.tolerance,
                                             cfg.max_iters, cfg.workers);
    if (!diag.converged)
        throw SolverFailure("solve_discounted: no contraction to tolerance within max_iters",
                            std::move(diag.residual_history));
    return {std::move(field), std::move(diag)};
}

/// Relative value iteration for the ergodic pair rho = min_zeta [LV + c],
/// normalized so V vanishes at the anchor node (the node nearest the origin
/// by default). Structural evidence -- near-monotone cost or a Lyapunov
/// certificate -- should be checked separately; see check_assumptions.
inline ErgodicSolution solve_ergodic(const ControlProblem& problem, const RectGrid& grid,
                                     const SolverConfig& cfg) {
    const auto controls = cfg.controls_for(problem.control_set);
    const auto op = UpwindOperator::for_controls(problem, grid, controls, false);
    const std::int64_t anchor = detail::resolve_anchor(grid, cfg.anchor_node);

    ErgodicSolution sol;
    sol.V = ValueField(grid, false, BoundaryKind::truncation);
    sol.diag = detail::rvi_iteration(op, anchor, sol.V.values, sol.rho, cfg.tolerance,
                                     cfg.max_iters, cfg.workers);
    if (!sol.diag.converged)
        throw SolverFailure("solve_ergodic: rho still oscillating beyond tolerance at max_iters",
                            std::move(sol.diag.residual_history));
    return sol;
}

/// Monotone fixed point for the exit-time equation
/// min_zeta [L phi - delta phi + c] = 0 in O, phi = c_e on the boundary of O.
/// The grid covers the closure of O with cfg.exit_nodes_per_axis nodes.
inline SolveResult solve_exit(const ControlProblem& problem, const SolverConfig& cfg) {
    if (!problem.exit_domain || !problem.exit_discount || !problem.exit_terminal)
        throw std::invalid_argument("solve_exit: problem lacks exit domain/discount/terminal");
    const Box& box = *problem.exit_domain;
    std::vector<Axis> axes;
    for (size_t k = 0; k < box.lo.size(); ++k)
        axes.emplace_back(box.lo[k], box.hi[k], cfg.exit_nodes_per_axis);
    RectGrid grid(std::move(axes));

    const auto controls = cfg.controls_for(problem.control_set);
    auto op = UpwindOperator::for_controls(problem, grid, controls, true);

    ValueField field(grid, false, BoundaryKind::dirichlet);
    Vec x(static_cast<size_t>(grid.dim()));
    for (std::int64_t i = 0; i < grid.num_nodes(); ++i) {
        if (!op.pinned()[static_cast<size_t>(i)]) continue;
        grid.node(i, x);
        field.values[static_cast<size_t>(i)] = problem.exit_terminal(x);
    }
    auto diag =
        detail::dirichlet_iteration(op, field.values, cfg.tolerance, cfg.max_iters, cfg.workers);
    if (!diag.converged)
        throw SolverFailure("solve_exit: fixed point not reached within max_iters",
                            std::move(diag.residual_history));
    return {std::move(field), std::move(diag)};
}

/// Measurable minimizing selector: per node the argmin of the discrete
/// Hamiltonian over the control samples, ties to the lexicographically
/// smallest control. Nearest-node interpolation keeps the policy the genuinely
/// discontinuous object the mollifier smooths. Time-dependent value fields
/// yield (time x state) policies slice by slice.
inline GridPolicy extract_selector(const ControlProblem& problem, const ValueField& value,
                                   const SolverConfig& cfg) {
    const auto controls = cfg.controls_for(problem.control_set);
    const int m = problem.control_set.dim();
    const bool exit_mode = value.boundary == BoundaryKind::dirichlet;

    if (!value.has_time) {
        const auto op = UpwindOperator::for_controls(problem, value.grid, controls, exit_mode);
        std::vector<int> amin;
        op.argmin(value.values, amin, cfg.workers);
        Vec vals(static_cast<size_t>(value.grid.num_nodes()) * static_cast<size_t>(m));
        for (std::int64_t i = 0; i < value.grid.num_nodes(); ++i)
            for (int c = 0; c < m; ++c)
                vals[size_t(i * m + c)] = controls[size_t(amin[static_cast<size_t>(i)])][static_cast<size_t>(c)];
        return GridPolicy(value.grid, false, problem.control_set, std::move(vals),
                          Interpolation::nearest);
    }

    std::vector<Axis> space_axes(value.grid.axes().begin() + 1, value.grid.axes().end());
    RectGrid space(std::move(space_axes));
    const auto op = UpwindOperator::for_controls(problem, space, controls, false);
    const int slices = value.grid.axis(0).n;
    const std::int64_t sn = space.num_nodes();
    Vec vals(static_cast<size_t>(value.grid.num_nodes()) * static_cast<size_t>(m));
    Vec slice_vals(static_cast<size_t>(sn));
    std::vector<int> amin;
    for (int s = 0; s < slices; ++s) {
        const std::int64_t off = value.slice_offset(s);
        std::copy(value.values.begin() + off, value.values.begin() + off + sn, slice_vals.begin());
        op.argmin(slice_vals, amin, cfg.workers);
        for (std::int64_t i = 0; i < sn; ++i)
            for (int c = 0; c < m; ++c)
                vals[size_t((off + i) * m + c)] = controls[size_t(amin[static_cast<size_t>(i)])][static_cast<size_t>(c)];
    }
    return GridPolicy(value.grid, true, problem.control_set, std::move(vals),
                      Interpolation::nearest);
}

/// Linear policy evaluation: the criterion's equation with the minimum
/// dropped and zeta fixed to the policy's value. Same discretization as the
/// corresponding solver; the high-accuracy alternative to Monte Carlo.
inline PolicyEvaluation evaluate_policy_pde(const ControlProblem& problem, const GridPolicy& policy,
                                            Criterion criterion, const RectGrid& grid,
                                            const SolverConfig& cfg) {
    PolicyEvaluation ev;
    switch (criterion) {
        case Criterion::discounted: {
            if (!problem.discount || !(*problem.discount > 0.0))
                throw std::invalid_argument("evaluate_policy_pde: missing discount");
            const auto op = UpwindOperator::for_policy(problem, grid, policy, false);
            ev.field = ValueField(grid, false, BoundaryKind::truncation);
            ev.diag = detail::discounted_iteration(op, *problem.discount, ev.field.values,
                                                   cfg.tolerance, cfg.max_iters, cfg.workers);
            if (!ev.diag.converged)
                throw SolverFailure("evaluate_policy_pde: discounted evaluation did not converge",
                                    std::move(ev.diag.residual_history));
            return ev;
        }
        case Criterion::ergodic: {
            const auto op = UpwindOperator::for_policy(problem, grid, policy, false);
            const std::int64_t anchor = detail::resolve_anchor(grid, cfg.anchor_node);
            ev.field = ValueField(grid, false, BoundaryKind::truncation);
            double rho = 0.0;
            ev.diag = detail::rvi_iteration(op, anchor, ev.field.values, rho, cfg.tolerance,
                                            cfg.max_iters, cfg.workers);
            if (!ev.diag.converged)
                throw SolverFailure("evaluate_policy_pde: ergodic evaluation did not converge",
                                    std::move(ev.diag.residual_history));
            ev.rho = rho;
            return ev;
        }
        case Criterion::exit_time: {
            if (!problem.exit_domain || !problem.exit_discount || !problem.exit_terminal)
                throw std::invalid_argument("evaluate_policy_pde: missing exit data");
            const auto op = UpwindOperator::for_policy(problem, grid, policy, true);
            ev.field = ValueField(grid, false, BoundaryKind::dirichlet);
            Vec x(static_cast<size_t>(grid.dim()));
            for (std::int64_t i = 0; i < grid.num_nodes(); ++i) {
                if (!op.pinned()[static_cast<size_t>(i)]) continue;
                grid.node(i, x);
                ev.field.values[static_cast<size_t>(i)] = problem.exit_terminal(x);
            }
            ev.diag = detail::dirichlet_iteration(op, ev.field.values, cfg.tolerance,
                                                  cfg.max_iters, cfg.workers);
            if (!ev.diag.converged)
                throw SolverFailure("evaluate_policy_pde: exit evaluation did not converge",
                                    std::move(ev.diag.residual_history));
            return ev;
        }
        case Criterion::finite_horizon: {
            if (!problem.horizon || !problem.terminal_cost)
                throw std::invalid_argument("evaluate_policy_pde: missing horizon/terminal cost");
            // CFL bound from the control-lattice operator covers the policy's
            // controls up to interpolation between lattice points; the 0.9
            // margin absorbs off-lattice drift values
            const auto bound_op = UpwindOperator::for_controls(
                problem, grid, cfg.controls_for(problem.control_set), false);
            ev.field = detail::parabolic_march(
                grid, *problem.horizon, problem.terminal_cost, cfg.time_step,
                0.9 * bound_op.stable_dt(), cfg.time_slices, [&](double t, const Vec& psi, Vec& out) {
                    const auto op =
                        UpwindOperator::for_policy(problem, grid, policy, false, t);
                    op.hamiltonian(psi, out, cfg.workers);
                });
            ev.diag.converged = true;
            ev.diag.dt_eff = bound_op.stable_dt();
            return ev;
        }
    }
    throw std::logic_error("evaluate_policy_pde: unknown criterion");
}

}  // namespace ctrldiff
