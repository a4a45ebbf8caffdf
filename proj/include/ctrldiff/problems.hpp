#pragma once

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ctrldiff/control.hpp"

namespace ctrldiff {

using ParamMap = std::map<std::string, double>;

namespace detail {

inline double param(const ParamMap& p, const std::string& key, double fallback) {
    auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

inline DiffusionFn constant_sigma(int d, double s) {
    return [d, s](std::span<const double>, std::span<double> out) {
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) out[size_t(i * d + j)] = i == j ? s : 0.0;
    };
}

}  // namespace detail

/// Built-in benchmark problems, referenced by name with numeric parameters.
///
///   lq                  dX = zeta dt + sqrt(2a) dW, c = q x^2 + r zeta^2,
///                       U = [-u_max, u_max]^dim; closed-form Riccati references
///   double_well         dX = zeta dt + sqrt(2a) dW, c = (x^2 - w^2)^2 + k zeta^2,
///                       U = [-u_max, u_max]; bang-bang-like selector
///   ou                  dX = -theta X dt + sigma dW, U = {0}, c = x^2;
///                       stationary-moment references
///   brownian_exit       dX = sqrt(2) dW on O = (-1, 1), c = 1, delta = 0,
///                       c_e = 0; E[tau] = (1 - x^2)/2
///   controlled_ou_ergodic  dX = zeta dt + sqrt(2) dW, U = [-1, 1],
///                       c = x^2 + 0.5 zeta^2
///
/// Parameters common to several families: a (diffusion a = sigma^2/2), alpha
/// (discount), T (horizon), u_max, dim.
inline ControlProblem builtin_problem(const std::string& name, const ParamMap& params = {}) {
    using detail::param;
    ControlProblem pr;

    if (name == "lq") {
        const int d = int(param(params, "dim", 1));
        const double a = param(params, "a", 0.5);
        const double q = param(params, "q", 1.0);
        const double r = param(params, "r", 1.0);
        const double umax = param(params, "u_max", 2.0);
        pr.dim_x = d;
        pr.control_set = ControlSet::symmetric(umax, d);
        pr.drift = [d](std::span<const double>, std::span<const double> z, std::span<double> out) {
            for (int i = 0; i < d; ++i) out[static_cast<size_t>(i)] = z[static_cast<size_t>(i)];
        };
        pr.diffusion = detail::constant_sigma(d, std::sqrt(2.0 * a));
        pr.running_cost = [q, r](std::span<const double> x, std::span<const double> z) {
            double s = 0.0;
            for (size_t i = 0; i < x.size(); ++i) s += q * x[i] * x[i];
            for (size_t i = 0; i < z.size(); ++i) s += r * z[i] * z[i];
            return s;
        };
        pr.horizon = param(params, "T", 1.0);
        pr.terminal_cost = [](std::span<const double>) { return 0.0; };
        pr.discount = param(params, "alpha", 1.0);
        return pr;
    }

    if (name == "double_well") {
        const double a = param(params, "a", 0.5);
        const double w = param(params, "well", 1.0);
        const double k = param(params, "control_weight", 0.1);
        const double umax = param(params, "u_max", 1.0);
        pr.dim_x = 1;
        pr.control_set = ControlSet::symmetric(umax, 1);
        pr.drift = [](std::span<const double>, std::span<const double> z, std::span<double> out) {
            out[0] = z[0];
        };
        pr.diffusion = detail::constant_sigma(1, std::sqrt(2.0 * a));
        pr.running_cost = [w, k](std::span<const double> x, std::span<const double> z) {
            const double s = x[0] * x[0] - w * w;
            return s * s + k * z[0] * z[0];
        };
        pr.horizon = param(params, "T", 1.0);
        pr.terminal_cost = [](std::span<const double>) { return 0.0; };
        pr.discount = param(params, "alpha", 1.0);
        return pr;
    }

    if (name == "ou") {
        const double theta = param(params, "theta", 1.0);
        const double sigma = param(params, "sigma", std::sqrt(2.0));
        pr.dim_x = 1;
        pr.control_set = ControlSet::singleton(0.0, 1);
        pr.drift = [theta](std::span<const double> x, std::span<const double>,
                           std::span<double> out) { out[0] = -theta * x[0]; };
        pr.diffusion = detail::constant_sigma(1, sigma);
        pr.running_cost = [](std::span<const double> x, std::span<const double>) {
            return x[0] * x[0];
        };
        pr.horizon = param(params, "T", 1.0);
        pr.terminal_cost = [](std::span<const double>) { return 0.0; };
        pr.discount = param(params, "alpha", 1.0);
        return pr;
    }

    if (name == "brownian_exit") {
        const double lo = param(params, "domain_lo", -1.0);
        const double hi = param(params, "domain_hi", 1.0);
        pr.dim_x = 1;
        pr.control_set = ControlSet::singleton(0.0, 1);
        pr.drift = [](std::span<const double>, std::span<const double>, std::span<double> out) {
            out[0] = 0.0;
        };
        pr.diffusion = detail::constant_sigma(1, std::sqrt(2.0));
        pr.running_cost = [](std::span<const double>, std::span<const double>) { return 1.0; };
        pr.cost_bound = 1.0;
        pr.exit_domain = Box{{lo}, {hi}};
        pr.exit_discount = [](std::span<const double>, std::span<const double>) { return 0.0; };
        pr.exit_terminal = [](std::span<const double>) { return 0.0; };
        return pr;
    }

    if (name == "controlled_ou_ergodic") {
        const double umax = param(params, "u_max", 1.0);
        const double sigma = param(params, "sigma", std::sqrt(2.0));
        pr.dim_x = 1;
        pr.control_set = ControlSet::symmetric(umax, 1);
        pr.drift = [](std::span<const double>, std::span<const double> z, std::span<double> out) {
            out[0] = z[0];
        };
        pr.diffusion = detail::constant_sigma(1, sigma);
        pr.running_cost = [](std::span<const double> x, std::span<const double> z) {
            return x[0] * x[0] + 0.5 * z[0] * z[0];
        };
        pr.discount = param(params, "alpha", 1.0);
        return pr;
    }

    std::ostringstream os;
    os << "builtin_problem: unknown name '" << name
       << "'; available: lq, double_well, ou, brownian_exit, controlled_ou_ergodic";
    throw std::invalid_argument(os.str());
}

}  // namespace ctrldiff
