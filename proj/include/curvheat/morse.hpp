#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "curvheat/geometry.hpp"

namespace curvheat {

// Pointwise signature of the curvature: either exactly q negative and n-q
// positive eigenvalues, or a degenerate split (n-, n0, n+).
struct Classification {
    bool degenerate = false;
    int q = -1;  // valid when !degenerate
    int n_minus = 0, n_zero = 0, n_plus = 0;
};

Classification classify(std::span<const double> alphas, double zero_tol);

// Curvature integral with its degenerate-coverage diagnostics.
struct BoundValue {
    double value = 0.0;
    double degenerate_weight_fraction = 0.0;
    bool coverage_warning = false;  // raised above 10% degenerate weight
};

// rank * int_{M(q)} (-1)^q prod_j alpha_j/(2pi) dv   (weak Morse density)
BoundValue weak_bound(const ModelGeometry& geom, int q, double zero_tol = 1e-9);

// rank * int_{M(<=q)} (-1)^q prod_j alpha_j/(2pi) dv (strong Morse density)
BoundValue strong_bound(const ModelGeometry& geom, int q, double zero_tol = 1e-9);

// rank * int_M u^{-n} sum_{j<=q} (-1)^{q-j} e0_trace(alpha(x), u, j, 1) dv,
// the u-dependent majorant that interpolates toward the strong bound.
double u_bound(const ModelGeometry& geom, int q, double u);

struct InequalityCheck {
    std::string kind;  // "dim<=trace" | "alternating" | "equality@n" | "u-bound"
    int q = 0;
    double lhs = 0.0, rhs = 0.0;
    double margin = 0.0;  // rhs - lhs (absolute deviation for equality checks)
    bool pass = false;
};

struct MorseReport {
    int p = 0;
    double u = 0.0;
    int n = 0;
    std::vector<double> weak;          // per q
    std::vector<double> strong;        // per q
    std::map<double, std::vector<double>> u_bounds;  // u -> per-q values
    std::vector<double> traces;        // tr_q exp(-(u/p) D_p^2)
    std::vector<double> trace_bounds;
    std::vector<long long> exact_dims;
    std::vector<InequalityCheck> checks;
    bool all_pass = false;
};

// Runs the full inequality chain on a built-in model with exact dimensions.
MorseReport verify_inequalities(const ModelGeometry& geom, int p, double u);

}  // namespace curvheat
