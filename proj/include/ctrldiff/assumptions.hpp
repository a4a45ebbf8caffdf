#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ctrldiff/control.hpp"
#include "ctrldiff/generator.hpp"
#include "ctrldiff/linalg.hpp"
#include "ctrldiff/value_field.hpp"

namespace ctrldiff {

enum class CheckStatus { pass, fail, not_checked };

inline const char* to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::pass: return "pass";
        case CheckStatus::fail: return "fail";
        default: return "not-checked";
    }
}

struct AssumptionCheck {
    std::string name;
    CheckStatus status = CheckStatus::not_checked;
    double witness = 0.0;      // the extremal sampled quantity
    std::string detail;
};

/// Sampled numerical evidence for the standing assumptions; these are
/// certificates on a finite grid, not proofs.
struct AssumptionReport {
    AssumptionCheck lipschitz;      // (A1) max local difference ratio per ball
    AssumptionCheck affine_growth;  // (A2) sup (<b,x>^+ + |sigma|^2)/(1+|x|^2)
    AssumptionCheck nondegeneracy;  // (A3) min eigenvalue of a(x)
    AssumptionCheck near_monotone;  // (A4) outer-shell min cost vs rho candidate
    AssumptionCheck lyapunov;       // (A5) max of L_zeta V + h - C0
    bool growth_warning = false;    // large affine-growth constant on this grid

    std::string summary() const {
        std::ostringstream os;
        for (const auto* c : {&lipschitz, &affine_growth, &nondegeneracy, &near_monotone, &lyapunov}) {
            os << c->name << ": " << to_string(c->status) << "  witness=" << c->witness;
            if (!c->detail.empty()) os << "  (" << c->detail << ")";
            os << "\n";
        }
        if (growth_warning)
            os << "warning: affine-growth constant is large on the truncated grid\n";
        return os.str();
    }
};

struct AssumptionInputs {
    std::vector<Vec> control_samples;               // finite subset of U
    std::optional<double> near_monotone_rho;        // (A4) candidate
    std::optional<LyapunovCertificate> lyapunov;    // (A5) certificate
    double growth_warn_threshold = 1e3;
};

/// Evaluates (A1)-(A5) on the grid nodes and control samples. Deterministic:
/// identical inputs always produce identical reports.
inline AssumptionReport check_assumptions(const ControlProblem& problem, const RectGrid& grid,
                                          const AssumptionInputs& in) {
    if (in.control_samples.empty())
        throw std::invalid_argument("check_assumptions: need control samples");
    const int d = problem.dim_x;
    if (grid.dim() != d) throw std::invalid_argument("check_assumptions: grid dim mismatch");

    AssumptionReport rep;
    Vec bx(static_cast<size_t>(d)), by(static_cast<size_t>(d)), sx(static_cast<size_t>(d) * static_cast<size_t>(d)), sy(static_cast<size_t>(d) * static_cast<size_t>(d));
    Vec a(static_cast<size_t>(d) * static_cast<size_t>(d)), scratch(static_cast<size_t>(d) * static_cast<size_t>(d));
    std::vector<int> idx(static_cast<size_t>(d));

    // (A1) local Lipschitz ratios over adjacent node pairs, reported per ball
    // |x| <= R for a handful of radii covering the grid.
    {
        double grid_radius = 0.0;
        for (int k = 0; k < d; ++k)
            grid_radius = std::max(grid_radius,
                                   std::max(std::abs(grid.axis(k).lo), std::abs(grid.axis(k).hi)));
        const int nballs = 4;
        std::vector<double> ball_r(nballs), ball_ratio(nballs, 0.0);
        for (int i = 0; i < nballs; ++i) ball_r[static_cast<size_t>(i)] = grid_radius * double(i + 1) / nballs;

        double overall = 0.0;
        for (std::int64_t f = 0; f < grid.num_nodes(); ++f) {
            grid.unflatten(f, idx);
            Vec x = grid.node(f);
            const double xn = norm2(x);
            for (int k = 0; k < d; ++k) {
                if (idx[static_cast<size_t>(k)] + 1 >= grid.axis(k).n) continue;
                Vec y = x;
                y[static_cast<size_t>(k)] = grid.axis(k).coord(idx[static_cast<size_t>(k)] + 1);
                const double dist = std::abs(y[static_cast<size_t>(k)] - x[static_cast<size_t>(k)]);
                if (dist == 0.0) continue;
                problem.diffusion(x, sx);
                problem.diffusion(y, sy);
                double num = frobenius_dist2(sx, sy);
                for (const auto& z : in.control_samples) {
                    problem.drift(x, z, bx);
                    problem.drift(y, z, by);
                    double db2 = 0.0;
                    for (int j = 0; j < d; ++j) {
                        const double e = bx[static_cast<size_t>(j)] - by[static_cast<size_t>(j)];
                        db2 += e * e;
                    }
                    num = std::max(num, db2 + frobenius_dist2(sx, sy));
                }
                const double ratio = std::sqrt(num) / dist;
                const double reach = std::max(xn, norm2(y));
                for (int i = 0; i < nballs; ++i)
                    if (reach <= ball_r[static_cast<size_t>(i)] + 1e-12)
                        ball_ratio[static_cast<size_t>(i)] = std::max(ball_ratio[static_cast<size_t>(i)], ratio);
                overall = std::max(overall, ratio);
            }
        }
        rep.lipschitz.name = "A1 local Lipschitz";
        rep.lipschitz.status = std::isfinite(overall) ? CheckStatus::pass : CheckStatus::fail;
        rep.lipschitz.witness = overall;
        std::ostringstream os;
        for (int i = 0; i < nballs; ++i)
            os << (i ? ", " : "") << "C_" << ball_r[static_cast<size_t>(i)] << "=" << ball_ratio[static_cast<size_t>(i)];
        rep.lipschitz.detail = os.str();
    }

    // (A2) affine growth constant
    {
        double c0 = 0.0;
        for (std::int64_t f = 0; f < grid.num_nodes(); ++f) {
            Vec x = grid.node(f);
            problem.diffusion(x, sx);
            double s2 = 0.0;
            for (double v : sx) s2 += v * v;
            const double denom = 1.0 + dot(x, x);
            for (const auto& z : in.control_samples) {
                problem.drift(x, z, bx);
                const double inner = std::max(0.0, dot(bx, x));
                c0 = std::max(c0, (inner + s2) / denom);
            }
        }
        rep.affine_growth.name = "A2 affine growth";
        rep.affine_growth.status = std::isfinite(c0) ? CheckStatus::pass : CheckStatus::fail;
        rep.affine_growth.witness = c0;
        rep.growth_warning = c0 > in.growth_warn_threshold;
    }

    // (A3) nondegeneracy: min eigenvalue of a(x) over the grid
    {
        double lmin = std::numeric_limits<double>::infinity();
        for (std::int64_t f = 0; f < grid.num_nodes(); ++f) {
            Vec x = grid.node(f);
            problem.diffusion_matrix(x, a, scratch);
            lmin = std::min(lmin, sym_min_eigenvalue(a, d));
        }
        rep.nondegeneracy.name = "A3 nondegeneracy";
        rep.nondegeneracy.status = lmin > 1e-12 ? CheckStatus::pass : CheckStatus::fail;
        rep.nondegeneracy.witness = lmin;
    }

    // (A4) near-monotone running cost vs a supplied candidate for the optimal
    // ergodic value: min over U of c on the outermost grid shell.
    rep.near_monotone.name = "A4 near-monotone cost";
    if (in.near_monotone_rho) {
        double shell_min = std::numeric_limits<double>::infinity();
        for (std::int64_t f = 0; f < grid.num_nodes(); ++f) {
            grid.unflatten(f, idx);
            if (!grid.on_boundary(idx)) continue;
            Vec x = grid.node(f);
            for (const auto& z : in.control_samples)
                shell_min = std::min(shell_min, problem.running_cost(x, z));
        }
        rep.near_monotone.status =
            shell_min > *in.near_monotone_rho ? CheckStatus::pass : CheckStatus::fail;
        rep.near_monotone.witness = shell_min;
        rep.near_monotone.detail = "rho candidate " + std::to_string(*in.near_monotone_rho);
    }

    // (A5) Lyapunov drift inequality via centered differences of the sampled V.
    rep.lyapunov.name = "A5 Lyapunov drift";
    if (in.lyapunov) {
        const auto& cert = *in.lyapunov;
        ValueField vf(grid, false, BoundaryKind::truncation);
        for (std::int64_t f = 0; f < grid.num_nodes(); ++f) {
            Vec x = grid.node(f);
            vf.at(f) = cert.V(x);
            if (!(vf.at(f) > 1.0))
                throw std::invalid_argument("check_assumptions: Lyapunov V must exceed 1");
        }
        double worst = -std::numeric_limits<double>::infinity();
        for (std::int64_t f = 0; f < grid.num_nodes(); ++f) {
            grid.unflatten(f, idx);
            if (grid.on_boundary(idx)) continue;
            Vec x = grid.node(f);
            for (const auto& z : in.control_samples) {
                const double hval = cert.h(x, z);
                if (!(hval > 0.0))
                    throw std::invalid_argument("check_assumptions: Lyapunov h must be positive");
                const double lv = apply_generator(problem, vf, z, f);
                worst = std::max(worst, lv + hval - cert.C0);
            }
        }
        rep.lyapunov.status = worst <= 0.0 ? CheckStatus::pass : CheckStatus::fail;
        rep.lyapunov.witness = worst;
    }

    return rep;
}

}  // namespace ctrldiff
