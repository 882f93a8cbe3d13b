#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "curvheat/errors.hpp"

namespace curvheat {

inline constexpr int kMaxDim = 16;  // 2^n subset enumeration must stay desk-scale

// u*a / sinh(u*a); equals 1 at a = 0 (removable singularity).
double sinhc_inv(double a, double u);

// u*a / (1 - exp(-2*u*a)); equals 1/2 at a = 0.
double landau_factor(double a, double u);

// w / sinh(w) for complex w, series branch near the origin.
std::complex<double> sinhc_inv_complex(std::complex<double> w);

// Subset of {1..n} stored as an n-bit mask.
struct MultiIndex {
    std::uint32_t bits = 0;
    int n = 0;

    int size() const { return __builtin_popcount(bits); }
    bool contains(int j) const { return (bits >> (j - 1)) & 1u; }  // j in 1..n
    std::uint32_t complement() const { return ~bits & ((n >= 32) ? ~0u : ((1u << n) - 1)); }

    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
};

// All C(n,q) subsets of size q, ascending bitmask order.
std::vector<MultiIndex> subsets_of_size(int n, int q);

// sum_{j in J} alphas[j-1]
double alpha_sum(std::span<const double> alphas, MultiIndex J);

// Curvature form R and frame Gram matrix G, both Hermitian, G positive definite.
struct HermitianPair {
    Eigen::MatrixXcd R;
    Eigen::MatrixXcd G;

    HermitianPair(Eigen::MatrixXcd r, Eigen::MatrixXcd g);
};

// Generalized eigenvalues of (R, G), ascending: the curvature eigenvalues
// alpha_j relative to the metric. Cholesky reduction + Hermitian eigensolve.
std::vector<double> curvature_eigenvalues(const HermitianPair& pair);

double binomial(int n, int k);

}  // namespace curvheat
