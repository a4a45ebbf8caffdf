#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "ctrldiff/experiment.hpp"

namespace ctrldiff {

/// Raised on malformed or invalid experiment specs (CLI exit code 4).
class SpecError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline Criterion criterion_from_string(const std::string& s) {
    if (s == "finite_horizon") return Criterion::finite_horizon;
    if (s == "discounted") return Criterion::discounted;
    if (s == "ergodic") return Criterion::ergodic;
    if (s == "exit") return Criterion::exit_time;
    throw SpecError("spec: unknown criterion '" + s +
                    "' (expected finite_horizon|discounted|ergodic|exit)");
}

inline EvalMode mode_from_string(const std::string& s) {
    if (s == "pde") return EvalMode::pde;
    if (s == "mc") return EvalMode::mc;
    if (s == "both") return EvalMode::both;
    throw SpecError("spec: unknown evaluation mode '" + s + "' (expected pde|mc|both)");
}

}  // namespace detail

/// Parses the JSON experiment spec documented in docs/spec_schema.md.
inline ExperimentSpec parse_experiment_spec(const nlohmann::json& j) {
    try {
        ExperimentSpec spec;
        const auto& prob = j.at("problem");
        spec.problem_name = prob.at("name").get<std::string>();
        if (prob.contains("params"))
            for (auto it = prob["params"].begin(); it != prob["params"].end(); ++it)
                spec.params[it.key()] = it.value().get<double>();

        spec.criterion = detail::criterion_from_string(j.at("criterion").get<std::string>());

        if (j.contains("grid")) {
            const auto& g = j["grid"];
            spec.grid.lo = g.at("lo").get<Vec>();
            spec.grid.hi = g.at("hi").get<Vec>();
            spec.grid.n = g.at("n").get<std::vector<int>>();
        } else if (spec.criterion != Criterion::exit_time) {
            throw SpecError("spec: non-exit criteria need a grid section");
        }

        if (j.contains("solver")) {
            const auto& s = j["solver"];
            if (s.contains("tolerance")) spec.solver.tolerance = s["tolerance"].get<double>();
            if (s.contains("max_iters")) spec.solver.max_iters = s["max_iters"].get<std::int64_t>();
            if (s.contains("control_points"))
                spec.solver.control_points_per_axis = s["control_points"].get<int>();
            if (s.contains("time_step")) spec.solver.time_step = s["time_step"].get<double>();
            if (s.contains("time_slices")) spec.solver.time_slices = s["time_slices"].get<int>();
            if (s.contains("exit_nodes")) spec.solver.exit_nodes_per_axis = s["exit_nodes"].get<int>();
            if (s.contains("anchor_node")) spec.solver.anchor_node = s["anchor_node"].get<std::int64_t>();
            if (s.contains("workers")) spec.solver.workers = s["workers"].get<int>();
        }
        if (j.contains("extract_refine")) spec.extract_refine = j["extract_refine"].get<int>();
        if (j.contains("eta_ladder")) spec.eta_ladder = j["eta_ladder"].get<std::vector<double>>();
        if (j.contains("mode")) spec.mode = detail::mode_from_string(j["mode"].get<std::string>());

        if (j.contains("mc")) {
            const auto& m = j["mc"];
            if (m.contains("dt")) spec.mc.dt = m["dt"].get<double>();
            if (m.contains("horizon")) spec.mc.horizon = m["horizon"].get<double>();
            if (m.contains("paths")) spec.mc.paths = m["paths"].get<std::int64_t>();
            if (m.contains("antithetic")) spec.mc.antithetic = m["antithetic"].get<bool>();
            if (m.contains("burn_in")) spec.mc.burn_in_frac = m["burn_in"].get<double>();
            if (m.contains("tail_tol")) spec.mc.tail_tol = m["tail_tol"].get<double>();
            if (m.contains("exit_bridge")) spec.mc.exit_bridge = m["exit_bridge"].get<bool>();
            if (m.contains("workers")) spec.mc.workers = m["workers"].get<int>();
        }

        if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
        spec.mc.seed = spec.seed;
        if (j.contains("epsilon")) spec.epsilon = j["epsilon"].get<double>();
        if (j.contains("probe")) spec.probe = j["probe"].get<Vec>();
        if (j.contains("out_dir")) spec.out_dir = j["out_dir"].get<std::string>();

        spec.validate();
        return spec;
    } catch (const SpecError&) {
        throw;
    } catch (const std::exception& e) {
        throw SpecError(std::string("spec: ") + e.what());
    }
}

inline ExperimentSpec load_experiment_spec(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw SpecError("spec: cannot open " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const std::exception& e) {
        throw SpecError(std::string("spec: JSON parse failure in ") + path + ": " + e.what());
    }
    return parse_experiment_spec(j);
}

}  // namespace ctrldiff
