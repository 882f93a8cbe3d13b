#pragma once

#include <optional>
#include <span>
#include <vector>

#include "curvheat/geometry.hpp"
#include "curvheat/spectral.hpp"

namespace curvheat {

// Partial sum of the fiber stationary-phase series:
// (p/4pi u)^n sum_{k<=order} (u/p)^k / k! * d^{2k}/dtheta^{2k} Phi0(i theta + 2u)|_0.
double stationary_expand(std::span<const double> alphas, double u, double p, int order);

struct GaussianQuad {
    double value = 0.0;
    double imag_residual = 0.0;     // conjugate-symmetry defect of the quadrature
    double rel_error_estimate = 0.0;
};

// Reference quadrature (p/4pi u)^{n+1/2} int_R Phi0(i theta + 2u) e^{-p theta^2/4u} dtheta.
GaussianQuad gaussian_reference(std::span<const double> alphas, double u, double p);

struct ExpansionReport {
    int n = 0;
    double u = 0.0;
    int q = 0;
    std::vector<int> p_grid;
    std::vector<double> fitted;                    // c_r, r = 0..k
    std::vector<std::optional<double>> predicted;  // closed forms where available
    std::optional<double> residual_order;          // empirical (p/u) exponent of the remainder
    double condition = 0.0;                        // scaled design-matrix condition number
    double max_remainder_rel = 0.0;                // |remainder| / leading at the largest p
    bool exponent_ok = false;
};

// Least-squares fit trace(p) ~ sum_r c_r (p/u)^{n-r} on per-unit-volume samples.
ExpansionReport fit_coefficients(std::span<const HeatTraceSample> samples, int n, int k,
                                 std::vector<std::optional<double>> predicted = {});

// End-to-end: spectral traces -> fit -> closed-form comparison -> remainder
// decay check (throws verification_error when the decay order is violated).
ExpansionReport expansion_report(const ModelGeometry& geom, double u, std::span<const int> p_grid,
                                 int k, int q = 0);

}  // namespace curvheat
