#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ctrldiff/assumptions.hpp"
#include "ctrldiff/estimators.hpp"
#include "ctrldiff/hjb.hpp"
#include "ctrldiff/io.hpp"
#include "ctrldiff/pairing.hpp"
#include "ctrldiff/problems.hpp"

namespace ctrldiff {

inline constexpr const char* kVersion = "0.1.0";

enum class EvalMode { pde, mc, both };

struct GridSpec {
    Vec lo, hi;
    std::vector<int> n;

    RectGrid build() const {
        if (lo.size() != hi.size() || lo.size() != n.size() || lo.empty())
            throw std::invalid_argument("GridSpec: inconsistent axis arrays");
        std::vector<Axis> axes;
        for (size_t k = 0; k < lo.size(); ++k) axes.emplace_back(lo[k], hi[k], n[k]);
        return RectGrid(std::move(axes));
    }
};

struct ExperimentSpec {
    std::string problem_name;
    ParamMap params;
    Criterion criterion = Criterion::discounted;
    GridSpec grid;
    SolverConfig solver;
    int extract_refine = 64;  // selector lattice refinement over the solve lattice
    std::vector<double> eta_ladder = {0.8, 0.4, 0.2, 0.1, 0.05};
    EvalMode mode = EvalMode::pde;
    SimConfig mc;
    std::uint64_t seed = 0;
    double epsilon = 0.05;  // near-optimality target on the final rung
    Vec probe;              // empty: origin
    std::string out_dir;

    void validate() const {
        if (eta_ladder.size() < 3)
            throw std::invalid_argument("ExperimentSpec: eta ladder needs at least 3 rungs");
        for (size_t i = 1; i < eta_ladder.size(); ++i)
            if (!(eta_ladder[i] < eta_ladder[i - 1]))
                throw std::invalid_argument("ExperimentSpec: eta ladder must strictly decrease");
        for (double e : eta_ladder)
            if (!(e > 0.0)) throw std::invalid_argument("ExperimentSpec: eta must be positive");
        if (!(epsilon > 0.0)) throw std::invalid_argument("ExperimentSpec: epsilon must be positive");
        if (criterion != Criterion::exit_time) (void)grid;  // built lazily; errors surface there
    }
};

struct GapRow {
    double eta = 0.0;
    double lipschitz = 0.0;
    double cost = 0.0;         // J(v_eta) at the probe (rho for ergodic)
    double gap = 0.0;          // J(v_eta) - J*
    double pairing_gap = 0.0;  // dictionary gap to v*
    int mc_used = 0;
    double mc_std_error = 0.0;
    int mc_unreliable = 0;
};

struct GapReport {
    std::string problem;
    std::string criterion;
    double j_star = 0.0;     // PDE evaluation of the extracted selector at the probe
    double hjb_value = 0.0;  // HJB field at the probe (rho* for ergodic)
    std::vector<GapRow> rows;
    std::uint64_t seed = 0;
    std::string grid_desc;
    double solver_tolerance = 0.0;
    double epsilon = 0.0;
    int threshold_met = 0;  // final-rung gap <= epsilon
    std::string assumptions;  // compact status string, e.g. "A1=pass;...;A5=not-checked"
    std::string version = kVersion;
};

struct SweepRow {
    double eta = 0.0;
    double pairing_gap = 0.0;
    double cost_gap = 0.0;  // |J(v_eta) - J*|
};

struct SweepReport {
    std::vector<SweepRow> rows;
    double pairing_final_fraction = 0.0;  // final rung / first rung
    double cost_final_fraction = 0.0;
    int thresholds_met = 0;  // both fractions <= 0.05
    GapReport base;          // the underlying near-optimality report
};

namespace detail {

struct PipelineState {
    ControlProblem problem;
    RectGrid grid;
    ValueField value;            // HJB solution
    std::optional<double> rho;   // ergodic optimal value
    GridPolicy selector;
    PairingDictionary dictionary;
    Vec probe;
    AssumptionReport assumptions;
};

inline std::string compact_assumptions(const AssumptionReport& r) {
    std::ostringstream os;
    os << "A1=" << to_string(r.lipschitz.status) << ";A2=" << to_string(r.affine_growth.status)
       << ";A3=" << to_string(r.nondegeneracy.status)
       << ";A4=" << to_string(r.near_monotone.status) << ";A5=" << to_string(r.lyapunov.status);
    return os.str();
}

inline double probe_value(const ValueField& f, const Vec& probe, Criterion crit) {
    if (crit == Criterion::finite_horizon) {
        Vec p(static_cast<size_t>(f.grid.dim()));
        p[0] = 0.0;
        for (size_t k = 0; k + 1 < p.size(); ++k) p[k + 1] = probe[k];
        return f.interpolate(p);
    }
    return f.interpolate(probe);
}

/// Cost of a policy at the probe under the spec's criterion, PDE route.
inline double pde_cost(const ControlProblem& pr, const GridPolicy& pol, Criterion crit,
                       const RectGrid& grid, const SolverConfig& cfg, const Vec& probe) {
    PolicyEvaluation ev = evaluate_policy_pde(pr, pol, crit, grid, cfg);
    if (crit == Criterion::ergodic) return *ev.rho;
    return probe_value(ev.field, probe, crit);
}

inline CostEstimate mc_cost(const ControlProblem& pr, const GridPolicy& pol, Criterion crit,
                            const SimConfig& mc, const Vec& probe) {
    switch (crit) {
        case Criterion::finite_horizon: return estimate_finite_horizon(pr, pol, probe, mc);
        case Criterion::discounted: return estimate_discounted(pr, pol, probe, mc);
        case Criterion::ergodic: return estimate_ergodic(pr, pol, probe, mc);
        case Criterion::exit_time: return estimate_exit(pr, pol, probe, mc);
    }
    throw std::logic_error("mc_cost: unknown criterion");
}

inline SolverConfig extraction_config(const SolverConfig& solve_cfg, const ControlProblem& pr,
                                      int refine) {
    SolverConfig cfg = solve_cfg;
    if (!cfg.control_samples.empty() || refine <= 1) return cfg;
    const int m = pr.control_set.dim();
    const int base = cfg.control_points_per_axis;
    // refine the argmin lattice; selector quantization error shrinks as the
    // square of the lattice step, keeping mollified-policy gaps nonnegative
    // beyond iteration tolerance
    const int cap = m <= 1 ? 4097 : 129;
    cfg.control_points_per_axis = std::min(cap, (base - 1) * refine + 1);
    return cfg;
}

inline PipelineState run_solve_and_extract(const ExperimentSpec& spec) {
    spec.validate();
    PipelineState st;
    st.problem = builtin_problem(spec.problem_name, spec.params);

    if (spec.criterion == Criterion::exit_time) {
        if (!st.problem.exit_domain)
            throw std::invalid_argument("near-opt: exit criterion needs an exit domain");
        const Box& box = *st.problem.exit_domain;
        std::vector<Axis> axes;
        for (size_t k = 0; k < box.lo.size(); ++k)
            axes.emplace_back(box.lo[k], box.hi[k], spec.solver.exit_nodes_per_axis);
        st.grid = RectGrid(std::move(axes));
    } else {
        st.grid = spec.grid.build();
        if (st.grid.dim() != st.problem.dim_x)
            throw std::invalid_argument("near-opt: grid dimension does not match the problem");
    }

    st.probe = spec.probe.empty() ? Vec(static_cast<size_t>(st.problem.dim_x), 0.0) : spec.probe;
    if (int(st.probe.size()) != st.problem.dim_x)
        throw std::invalid_argument("near-opt: probe dimension mismatch");
    if (spec.criterion == Criterion::exit_time && !st.problem.exit_domain->contains(st.probe))
        throw std::invalid_argument("near-opt: probe outside the exit domain");

    // attach sampled assumption evidence (A4/A5 extras not wired through specs)
    st.assumptions = check_assumptions(st.problem, st.grid,
                                       AssumptionInputs{spec.solver.controls_for(st.problem.control_set),
                                                        std::nullopt, std::nullopt});

    switch (spec.criterion) {
        case Criterion::finite_horizon: {
            auto res = solve_finite_horizon(st.problem, st.grid, spec.solver);
            st.value = std::move(res.field);
            break;
        }
        case Criterion::discounted: {
            auto res = solve_discounted(st.problem, st.grid, spec.solver);
            st.value = std::move(res.field);
            break;
        }
        case Criterion::ergodic: {
            auto sol = solve_ergodic(st.problem, st.grid, spec.solver);
            st.value = std::move(sol.V);
            st.rho = sol.rho;
            break;
        }
        case Criterion::exit_time: {
            auto res = solve_exit(st.problem, spec.solver);
            st.value = std::move(res.field);
            break;
        }
    }

    const SolverConfig extract_cfg = extraction_config(spec.solver, st.problem, spec.extract_refine);
    st.selector = extract_selector(st.problem, st.value, extract_cfg);

    double half_width = 0.0;
    const int t0 = st.value.has_time ? 1 : 0;
    for (int k = t0; k < st.grid.dim() + t0; ++k) {
        const Axis& ax = st.value.has_time ? st.value.grid.axis(k) : st.grid.axis(k - t0);
        half_width = std::max(half_width, std::max(std::abs(ax.lo), std::abs(ax.hi)));
    }
    st.dictionary = default_dictionary(half_width, st.value.has_time,
                                       st.problem.horizon.value_or(1.0));
    return st;
}

}  // namespace detail

/// End-to-end near-optimality run: solve the criterion's equation, extract
/// the minimizing selector, mollify it down the eta ladder, and price every
/// rung against the selector's own cost J*.
inline GapReport run_near_optimality(const ExperimentSpec& spec) {
    auto st = detail::run_solve_and_extract(spec);

    GapReport rep;
    rep.problem = spec.problem_name;
    rep.criterion = to_string(spec.criterion);
    rep.seed = spec.seed;
    rep.grid_desc = st.grid.describe();
    rep.solver_tolerance = spec.solver.tolerance;
    rep.epsilon = spec.epsilon;
    rep.assumptions = detail::compact_assumptions(st.assumptions);

    rep.hjb_value = spec.criterion == Criterion::ergodic
                        ? *st.rho
                        : detail::probe_value(st.value, st.probe, spec.criterion);
    rep.j_star = detail::pde_cost(st.problem, st.selector, spec.criterion, st.grid, spec.solver,
                                  st.probe);

    for (size_t r = 0; r < spec.eta_ladder.size(); ++r) {
        const double eta = spec.eta_ladder[r];
        GapRow row;
        row.eta = eta;
        auto mol = mollify(st.selector, eta, spec.solver.workers);
        row.lipschitz = lipschitz_estimate(mol.policy);
        row.pairing_gap = pairing_gap(st.selector, mol.policy, st.dictionary);

        double cost = 0.0;
        if (spec.mode == EvalMode::pde || spec.mode == EvalMode::both)
            cost = detail::pde_cost(st.problem, mol.policy, spec.criterion, st.grid, spec.solver,
                                    st.probe);
        if (spec.mode == EvalMode::mc || spec.mode == EvalMode::both) {
            SimConfig mc = spec.mc;
            mc.seed = CounterRng::derive(spec.seed, std::uint64_t(r));
            const CostEstimate est =
                detail::mc_cost(st.problem, mol.policy, spec.criterion, mc, st.probe);
            row.mc_used = 1;
            row.mc_std_error = est.std_error;
            row.mc_unreliable = est.unreliable ? 1 : 0;
            if (spec.mode == EvalMode::mc) cost = est.mean;
        }
        row.cost = cost;
        row.gap = cost - rep.j_star;
        rep.rows.push_back(row);
    }

    rep.threshold_met = !rep.rows.empty() && rep.rows.back().gap <= spec.epsilon ? 1 : 0;
    return rep;
}

/// Continuity surrogate: pairing gap against cost gap down the ladder; both
/// must have shed >= 95% of their first-rung value by the final rung.
inline SweepReport run_continuity_sweep(const ExperimentSpec& spec) {
    SweepReport sw;
    sw.base = run_near_optimality(spec);
    for (const auto& row : sw.base.rows)
        sw.rows.push_back({row.eta, row.pairing_gap, std::abs(row.gap)});
    if (!sw.rows.empty()) {
        const auto& first = sw.rows.front();
        const auto& last = sw.rows.back();
        sw.pairing_final_fraction = first.pairing_gap > 0.0
                                        ? last.pairing_gap / first.pairing_gap
                                        : (last.pairing_gap > 0.0 ? 1.0 : 0.0);
        sw.cost_final_fraction = first.cost_gap > 0.0 ? last.cost_gap / first.cost_gap
                                                      : (last.cost_gap > 0.0 ? 1.0 : 0.0);
        sw.thresholds_met =
            sw.pairing_final_fraction <= 0.05 && sw.cost_final_fraction <= 0.05 ? 1 : 0;
    }
    return sw;
}

/// Report serialization: plain CSV whose sections round-trip every field
/// bit-exactly (%.17g numerics).
inline void save_gap_report_csv(const GapReport& r, std::ostream& os) {
    auto fd = [](double v) { return format_double(v); };
    os << "meta,problem," << r.problem << '\n';
    os << "meta,criterion," << r.criterion << '\n';
    os << "meta,j_star," << fd(r.j_star) << '\n';
    os << "meta,hjb_value," << fd(r.hjb_value) << '\n';
    os << "meta,seed," << r.seed << '\n';
    os << "meta,grid," << r.grid_desc << '\n';
    os << "meta,solver_tolerance," << fd(r.solver_tolerance) << '\n';
    os << "meta,epsilon," << fd(r.epsilon) << '\n';
    os << "meta,threshold_met," << r.threshold_met << '\n';
    os << "meta,assumptions," << r.assumptions << '\n';
    os << "meta,version," << r.version << '\n';
    os << "header,eta,lipschitz,cost,gap,pairing_gap,mc_used,mc_std_error,mc_unreliable\n";
    for (const auto& row : r.rows)
        os << "row," << fd(row.eta) << ',' << fd(row.lipschitz) << ',' << fd(row.cost) << ','
           << fd(row.gap) << ',' << fd(row.pairing_gap) << ',' << row.mc_used << ','
           << fd(row.mc_std_error) << ',' << row.mc_unreliable << '\n';
}

inline GapReport load_gap_report_csv(std::istream& is) {
    GapReport r;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        size_t pos = 0;
        while (true) {
            const size_t c = line.find(',', pos);
            if (c == std::string::npos) {
                cells.push_back(line.substr(pos));
                break;
            }
            cells.push_back(line.substr(pos, c - pos));
            pos = c + 1;
        }
        if (cells[0] == "meta" && cells.size() >= 3) {
            // grid descriptions may embed commas; rejoin the tail
            std::string val = cells[2];
            for (size_t i = 3; i < cells.size(); ++i) val += "," + cells[i];
            const std::string& key = cells[1];
            if (key == "problem") r.problem = val;
            else if (key == "criterion") r.criterion = val;
            else if (key == "j_star") r.j_star = std::strtod(val.c_str(), nullptr);
            else if (key == "hjb_value") r.hjb_value = std::strtod(val.c_str(), nullptr);
            else if (key == "seed") r.seed = std::strtoull(val.c_str(), nullptr, 10);
            else if (key == "grid") r.grid_desc = val;
            else if (key == "solver_tolerance") r.solver_tolerance = std::strtod(val.c_str(), nullptr);
            else if (key == "epsilon") r.epsilon = std::strtod(val.c_str(), nullptr);
            else if (key == "threshold_met") r.threshold_met = std::atoi(val.c_str());
            else if (key == "assumptions") r.assumptions = val;
            else if (key == "version") r.version = val;
        } else if (cells[0] == "row" && cells.size() == 9) {
            GapRow row;
            row.eta = std::strtod(cells[1].c_str(), nullptr);
            row.lipschitz = std::strtod(cells[2].c_str(), nullptr);
            row.cost = std::strtod(cells[3].c_str(), nullptr);
            row.gap = std::strtod(cells[4].c_str(), nullptr);
            row.pairing_gap = std::strtod(cells[5].c_str(), nullptr);
            row.mc_used = std::atoi(cells[6].c_str());
            row.mc_std_error = std::strtod(cells[7].c_str(), nullptr);
            row.mc_unreliable = std::atoi(cells[8].c_str());
            r.rows.push_back(row);
        }
    }
    return r;
}

/// Human-oriented aligned summary.
inline void print_gap_report(const GapReport& r, std::ostream& os) {
    os << "near-optimality report  problem=" << r.problem << "  criterion=" << r.criterion
       << "  seed=" << r.seed << '\n';
    os << "grid " << r.grid_desc << "  solver tol " << r.solver_tolerance << "  version "
       << r.version << '\n';
    os << "assumptions " << r.assumptions << '\n';
    os << "J* = " << r.j_star << "   (HJB value at probe " << r.hjb_value << ")\n";
    os << "  eta        lip(v_eta)       J(v_eta)            gap     pairing_gap\n";
    char buf[160];
    for (const auto& row : r.rows) {
        std::snprintf(buf, sizeof(buf), "%7.4f %14.6g %14.8g %14.6g %14.6g%s\n", row.eta,
                      row.lipschitz, row.cost, row.gap, row.pairing_gap,
                      row.mc_unreliable ? "  [mc unreliable]" : "");
        os << buf;
    }
    os << (r.threshold_met ? "final-rung gap within epsilon " : "final-rung gap exceeds epsilon ")
       << r.epsilon << '\n';
}

}  // namespace ctrldiff
