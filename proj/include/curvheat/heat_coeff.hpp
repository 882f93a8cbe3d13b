#pragma once

#include <complex>
#include <span>
#include <utility>
#include <vector>

#include "curvheat/analytic.hpp"

namespace curvheat {

// Diagonal endomorphism of the exterior algebra in the curvature eigenframe:
// one real entry per multi-index mask.
struct EndoCoefficient {
    int n = 0;
    std::vector<double> values;  // size 2^n, indexed by bitmask

    double at(MultiIndex J) const { return values[J.bits]; }
};

// tr over the degree-q component of exp(2u omega_d):
// sum over |J| = q of exp(-2u alpha_J).
double exp_omega_trace(std::span<const double> alphas, double u, int q);

// Principal heat coefficient as a diagonal endomorphism: the J-entry is
// (2pi)^{-n} prod_j landau_factor(alpha_j, u) * exp(-2u alpha_J), evaluated
// in the overflow-free form prod_j landau_factor(+-alpha_j, u).
EndoCoefficient e0_endo(std::span<const double> alphas, double u);

// Per-degree trace of the principal coefficient,
// rank * (4pi)^{-n} sum_{|J|=q} e^{u(alpha_cJ - alpha_J)} prod_j u a_j/sinh(u a_j).
// Deliberately evaluated through the sinh product (independent of e0_endo).
double e0_trace(std::span<const double> alphas, double u, int q, int rank_e);

// Bochner-Laplacian principal coefficient:
// (2pi)^{-n} e^{-u tau} prod_j landau_factor(alpha_j, u), tau = sum alpha_j.
double e0_bochner(std::span<const double> alphas, double u);

// Leading fiber-parametrix coefficient prod_j (z a_j/2)/sinh(z a_j/2);
// at z = 2u this is det^{-1/2} of the fiber Jacobi map.
std::complex<double> phi0(std::span<const double> alphas, std::complex<double> z);

// Derivatives d^m/dtheta^m Phi0(i theta + 2u) at theta = 0 for m = 0..max_order
// (max_order <= 6), via Bell-polynomial composition of the log-derivative series.
std::vector<std::complex<double>> phi0_theta_derivs(std::span<const double> alphas, double u,
                                                    int max_order);

// Second theta-derivative at 0; the computable part of the Bochner subleading term.
double phi0_dtheta2(std::span<const double> alphas, double u);

// Subleading coefficient in the quantized Kaehler case (alpha_j = 2pi).
// Sign fixed against the spectral oracle; see README notes on validation.
double e1_kahler(double u, double scalar_curvature, int n);

// Checked form: rejects curvature data violating the quantization hypothesis.
double e1_kahler(std::span<const double> alphas, double u, double scalar_curvature);

struct LargeULimit {
    enum class Kind { Nondegenerate, Degenerate, Vanishing };
    Kind kind = Kind::Vanishing;
    int n_minus = 0, n_zero = 0, n_plus = 0;
    int vanishing_exponent = 0;  // u^{-n0} prefactor in the degenerate case
    double coefficient = 0.0;    // 0 iff Vanishing
};

// Large-u classification of u^{-n} e0_trace(alphas, u, q, 1).
LargeULimit large_u_limit(std::span<const double> alphas, int q, double zero_tol);

// Tabulates (u, u^{-n} e0_trace) along a grid for convergence inspection.
std::vector<std::pair<double, double>> u_trend_check(std::span<const double> alphas, int q,
                                                     std::span<const double> u_grid);

// Diagonal of the rescaled model heat kernel exp(-L2^{0,u})(0,0); agrees with
// e0_endo entrywise (the model operator reproduces the principal coefficient).
EndoCoefficient model_heat_diag(std::span<const double> alphas, double u);

}  // namespace curvheat
