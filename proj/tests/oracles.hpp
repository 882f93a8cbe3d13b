#pragma once

// Test-only oracles, independent of the library code paths they check.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <span>
#include <vector>

namespace curvheat::testing {

inline constexpr double kPi = std::numbers::pi;

// Deterministic uniform in [-range, range]; avoids unspecified distribution
// implementations so frozen expectations stay portable.
inline double uniform_pm(std::mt19937_64& rng, double range) {
    return range * (2.0 * ((rng() >> 11) * 0x1.0p-53) - 1.0);
}

// Phi0(i theta + 2u) evaluated directly (brute product, no series branches
// beyond the removable singularity).
inline std::complex<double> phi0_direct(std::span<const double> alphas, double u, double theta) {
    std::complex<double> out = 1.0;
    const std::complex<double> z(2.0 * u, theta);
    for (double a : alphas) {
        const std::complex<double> w = z * a * 0.5;
        out *= (std::abs(w) < 1e-8) ? std::complex<double>(1.0) : w / std::sinh(w);
    }
    return out;
}

// Fourth-order central second difference in theta at 0.
inline double phi0_dtheta2_fd(std::span<const double> alphas, double u, double h = 1e-3) {
    auto f = [&](double th) { return phi0_direct(alphas, u, th).real(); };
    return (-f(2 * h) + 16 * f(h) - 30 * f(0) + 16 * f(-h) - f(2 * -h)) / (12 * h * h);
}

// Independent Landau-level sum for the rescaled model heat kernel diagonal on
// the component labelled by `mask`: per factor, ladder u|a|(2k+1) with level
// density u|a|/2pi and grading shift u(2 a 1_occupied - a); flat factors give
// the free heat kernel value 1/(4 pi).
inline double landau_sum_diag(std::span<const double> alphas, double u, std::uint32_t mask) {
    double prod = 1.0;
    for (std::size_t j = 0; j < alphas.size(); ++j) {
        const double a = alphas[j];
        if (a == 0.0) {
            prod *= 1.0 / (4.0 * kPi);
            continue;
        }
        const bool occupied = (mask >> j) & 1u;
        const double shift = u * (occupied ? (2.0 * a - a) : -a);
        double factor = 0.0;
        for (int k = 0;; ++k) {
            const double term = (u * std::abs(a) / (2.0 * kPi)) *
                                std::exp(-(u * std::abs(a) * (2 * k + 1) + shift));
            factor += term;
            if (term < 1e-18 * std::max(factor, 1e-300) && k > 2) break;
            if (k > 100000) break;
        }
        prod *= factor;
    }
    return prod;
}

// Cubic characteristic polynomial roots of det(R - lambda G) via a companion
// matrix; a route disjoint from Cholesky + Hermitian QR.
std::vector<double> pencil_roots_3x3(const std::complex<double> R[3][3],
                                     const std::complex<double> G[3][3]);

}  // namespace curvheat::testing
