#pragma once

// Test-only reference computations, independent of the library's solvers:
// Riccati equations for linear-quadratic problems, closed-form diffusion
// facts, and high-resolution quadrature for convolutions and pairings.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracles {

/// Scalar LQ with dx = zeta dt + sqrt(2a) dW, cost q x^2 + r zeta^2.
/// Finite horizon value psi(t, x) = P(t) x^2 + s(t): backward Riccati ODE
/// P' = P^2 / r - q, s' = -2 a P, P(T) = s(T) = 0, integrated by RK4.
struct RiccatiFH {
    double P0 = 0.0;
    double s0 = 0.0;
};

inline RiccatiFH riccati_finite_horizon(double T, double a, double q, double r,
                                        int steps = 200000) {
    auto fP = [&](double P) { return P * P / r - q; };
    double P = 0.0, s = 0.0;
    const double dt = T / steps;
    for (int k = 0; k < steps; ++k) {
        // integrate backward from T to 0
        const double k1 = fP(P);
        const double k2 = fP(P - 0.5 * dt * k1);
        const double k3 = fP(P - 0.5 * dt * k2);
        const double k4 = fP(P - dt * k3);
        const double Pmid1 = P - 0.5 * dt * k1, Pmid2 = P - 0.5 * dt * k2, Pend = P - dt * k3;
        s += dt / 6.0 * (2.0 * a * (P + 2.0 * Pmid1 + 2.0 * Pmid2 + Pend));
        P -= dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return {P, s};
}

/// Discounted LQ: V(x) = P x^2 + s with q - P^2 / r = alpha P and
/// s = 2 a P / alpha. Solved by bisection on the monotone residual.
inline double riccati_discounted_P(double alpha, double q, double r) {
    auto f = [&](double P) { return q - P * P / r - alpha * P; };
    double lo = 0.0, hi = 1.0;
    while (f(hi) > 0.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Expected exit time of dX = sqrt(2 a) dW from (-b, b): u'' a = -1,
/// u(+-b) = 0, so u(x) = (b^2 - x^2) / (2 a).
inline double brownian_exit_time(double x, double b, double a) {
    return (b * b - x * x) / (2.0 * a);
}

/// Stationary variance of dX = -theta X dt + sigma dW.
inline double ou_stationary_variance(double theta, double sigma) {
    return sigma * sigma / (2.0 * theta);
}

/// Composite Simpson quadrature on [lo, hi].
inline double simpson(const std::function<double(double)>& f, double lo, double hi, int panels) {
    const double h = (hi - lo) / panels;
    double acc = 0.0;
    for (int i = 0; i < panels; ++i) {
        const double x0 = lo + i * h;
        acc += h / 6.0 * (f(x0) + 4.0 * f(x0 + 0.5 * h) + f(x0 + h));
    }
    return acc;
}

/// The library's bump profile, normalized over [-1, 1] in one dimension.
inline double bump1d(double u) {
    const double s = 1.0 - u * u;
    return s > 0.0 ? s * s * s * (35.0 / 32.0) : 0.0;
}

/// Continuum mollification of a scalar policy: integral of
/// phi_eta(x - y) v(y) dy over the kernel support, truncated to [lo, hi] and
/// renormalized exactly as the discrete construction is.
inline double mollify_quadrature(const std::function<double(double)>& v, double x, double eta,
                                 double lo, double hi, int panels = 200000) {
    const double a = std::max(lo, x - eta), b = std::min(hi, x + eta);
    auto kern = [&](double y) { return bump1d((x - y) / eta) / eta; };
    const double num = simpson([&](double y) { return kern(y) * v(y); }, a, b, panels);
    const double den = simpson(kern, a, b, panels);
    return num / den;
}

/// Numerical max |d/dx| of a scalar function on [lo, hi].
inline double max_abs_derivative(const std::function<double(double)>& f, double lo, double hi,
                                 int samples = 4000) {
    double best = 0.0;
    const double h = (hi - lo) / samples;
    for (int i = 0; i + 1 <= samples; ++i) {
        const double x = lo + i * h;
        best = std::max(best, std::abs(f(x + h) - f(x)) / h);
    }
    return best;
}

/// Refined-grid trapezoid of f(x) g(x, v(x)) on [lo, hi].
inline double pairing_quadrature(const std::function<double(double)>& f,
                                 const std::function<double(double, double)>& g,
                                 const std::function<double(double)>& v, double lo, double hi,
                                 int nodes) {
    const double h = (hi - lo) / (nodes - 1);
    double acc = 0.0;
    for (int i = 0; i < nodes; ++i) {
        const double x = lo + i * h;
        const double w = (i == 0 || i == nodes - 1) ? 0.5 * h : h;
        acc += w * f(x) * g(x, v(x));
    }
    return acc;
}

/// Least-squares slope and R^2 of y against x.
struct Regression {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

inline Regression linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("linear_fit: need matched samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    Regression reg;
    reg.slope = (n * sxy - sx * sy) / den;
    reg.intercept = (sy - reg.slope * sx) / n;
    double ss_res = 0.0, ss_tot = 0.0;
    const double ybar = sy / n;
    for (size_t i = 0; i < n; ++i) {
        const double fit = reg.slope * x[i] + reg.intercept;
        ss_res += (y[i] - fit) * (y[i] - fit);
        ss_tot += (y[i] - ybar) * (y[i] - ybar);
    }
    reg.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return reg;
}

}  // namespace oracles
