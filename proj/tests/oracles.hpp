#pragma once

// Test-only oracles: closed forms and brute-force enumeration, kept
// independent of the solver paths they are used to check.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

namespace oracle {

/// Integral of rho ln rho for an isotropic Gaussian: -(d/2) ln(2 pi e s^2).
inline double gaussian_entropy(int dim, double sigma) {
    return -0.5 * dim * std::log(2.0 * 3.14159265358979323846 * 2.718281828459045 *
                                 sigma * sigma);
}

inline double gaussian_second_moment(int dim, double sigma) { return dim * sigma * sigma; }

/// Standard deviation of the heat evolution of a Gaussian (unit diffusivity).
inline double heat_sigma(double sigma0, double t) {
    return std::sqrt(sigma0 * sigma0 + 2.0 * t);
}

/// W2 between 1D Gaussians.
inline double gaussian_w2_1d(double m1, double s1, double m2, double s2) {
    return std::sqrt((m1 - m2) * (m1 - m2) + (s1 - s2) * (s1 - s2));
}

/// Exact 1D Gaussian density.
inline double gaussian_pdf_1d(double x, double mean, double sigma) {
    double z = (x - mean) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * 3.14159265358979323846));
}

/// Brute-force quadratic-cost OT between two uniform clouds of equal size:
/// by Birkhoff's theorem the optimum sits at a permutation. O(n!), so keep
/// n <= 8.
inline double assignment_w2(const std::vector<std::array<double, 3>>& xs,
                            const std::vector<std::array<double, 3>>& ys, int dim) {
    const std::size_t n = xs.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double cost = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (int a = 0; a < dim; ++a) {
                double dx = xs[i][a] - ys[perm[i]][a];
                cost += dx * dx;
            }
        }
        best = std::min(best, cost);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::sqrt(best / static_cast<double>(n));
}

/// Taylor-Green decay factor at unit viscosity on a 2 pi / k0 torus.
inline double taylor_green_decay(double t, double k0 = 1.0) {
    return std::exp(-2.0 * k0 * k0 * t);
}

}  // namespace oracle
