#pragma once

#include <cmath>
#include <stdexcept>

namespace ctrldiff {

/// Compactly supported polynomial bump phi(x) ~ (1 - |x|^2)^3 on |x| < 1,
/// zero outside, normalized numerically so that its integral over R^d is 1.
/// phi_eta(x) = eta^{-d} phi(x / eta).
class Mollifier {
public:
    explicit Mollifier(double bandwidth, int dim = 1) : eta_(bandwidth), dim_(dim) {
        if (!(bandwidth > 0.0)) throw std::invalid_argument("Mollifier: bandwidth must be positive");
        if (dim < 1) throw std::invalid_argument("Mollifier: dimension must be positive");
        norm_ = 1.0 / unit_integral(dim);
    }

    double bandwidth() const { return eta_; }
    int dim() const { return dim_; }

    /// Unnormalized radial profile at |u| = r (unit bandwidth).
    static double profile(double r) {
        const double s = 1.0 - r * r;
        return s > 0.0 ? s * s * s : 0.0;
    }

    /// Normalized kernel at radius r from the center (unit bandwidth).
    double unit_density(double r) const { return norm_ * profile(r); }

    /// phi_eta at distance r from the center.
    double density(double r) const {
        return std::pow(eta_, -dim_) * unit_density(r / eta_);
    }

    /// Integral of the unnormalized profile over the unit ball of R^d,
    /// by composite Simpson quadrature of the radial integral.
    static double unit_integral(int dim) {
        // surface area of the unit sphere S^{d-1}
        const double sd = 2.0 * std::pow(std::acos(-1.0), 0.5 * dim) / std::tgamma(0.5 * dim);
        const int n = 4000;  // panels; integrand is a degree-8 polynomial in r
        const double h = 1.0 / n;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double r0 = i * h, r1 = r0 + 0.5 * h, r2 = r0 + h;
            auto f = [dim](double r) { return profile(r) * std::pow(r, dim - 1); };
            acc += h / 6.0 * (f(r0) + 4.0 * f(r1) + f(r2));
        }
        return sd * acc;
    }

private:
    double eta_;
    int dim_;
    double norm_;
};

}  // namespace ctrldiff
