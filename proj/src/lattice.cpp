#include "curvheat/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "curvheat/errors.hpp"

namespace curvheat {

namespace {

using Cplx = std::complex<double>;
using SpMat = Eigen::SparseMatrix<Cplx>;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

SpMat build_hamiltonian(int d, int p, int N) {
    const double phi = kTwoPi * p * d / (static_cast<double>(N) * N);
    const double inv_h2 = static_cast<double>(N) * N;  // h = 1/N, unit area
    const int dim = N * N;
    auto idx = [N](int m, int n) { return ((m % N + N) % N) + N * ((n % N + N) % N); };

    std::vector<Eigen::Triplet<Cplx>> trip;
    trip.reserve(static_cast<std::size_t>(dim) * 5);
    for (int m = 0; m < N; ++m) {
        for (int n = 0; n < N; ++n) {
            const int i = idx(m, n);
            trip.emplace_back(i, i, Cplx(4.0 * inv_h2, 0.0));
            // Landau gauge: x-links carry e^{-i phi n}; the last y-row closes
            // the torus with e^{i phi N m} so every plaquette sees flux phi.
            const Cplx ux = std::polar(inv_h2, -phi * n);
            trip.emplace_back(i, idx(m + 1, n), -ux);
            trip.emplace_back(idx(m + 1, n), i, -std::conj(ux));
            const Cplx uy = (n == N - 1) ? std::polar(inv_h2, phi * N * m) : Cplx(inv_h2, 0.0);
            trip.emplace_back(i, idx(m, n + 1), -uy);
            trip.emplace_back(idx(m, n + 1), i, -std::conj(uy));
        }
    }
    SpMat H(dim, dim);
    H.setFromTriplets(trip.begin(), trip.end());
    return H;
}

std::vector<double> dense_lowest(const SpMat& H, int count) {
    Eigen::MatrixXcd D(H);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(D, Eigen::EigenvaluesOnly);
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    return out;
}

// Shift-invert block subspace iteration with Rayleigh-Ritz; handles the exact
// Landau degeneracies that plain Lanczos would miss.
std::vector<double> iterative_lowest(const SpMat& H, int count) {
    const int dim = static_cast<int>(H.rows());
    const int block = std::min(dim, count + 6);
    SpMat shifted = H;
    for (int i = 0; i < dim; ++i) shifted.coeffRef(i, i) += Cplx(1.0, 0.0);
    Eigen::SimplicialLLT<SpMat> llt(shifted);
    if (llt.info() != Eigen::Success) {
        throw conditioning_error("lattice_magnetic_eigs: factorization failed");
    }

    std::mt19937_64 rng(0x9d2c5680u);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXcd X(dim, block);
    for (int j = 0; j < block; ++j) {
        for (int i = 0; i < dim; ++i) X(i, j) = Cplx(gauss(rng), gauss(rng));
    }

    Eigen::VectorXd ritz = Eigen::VectorXd::Zero(block);
    for (int iter = 0; iter < 200; ++iter) {
        const Eigen::MatrixXcd Y = llt.solve(X);
        const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(Y);
        const Eigen::MatrixXcd Q =
            qr.householderQ() * Eigen::MatrixXcd::Identity(dim, block);
        const Eigen::MatrixXcd HQ = H * Q;
        const Eigen::MatrixXcd small = Q.adjoint() * HQ;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(small);
        X = Q * es.eigenvectors();
        const Eigen::VectorXd next = es.eigenvalues();
        const double drift = (next.head(count) - ritz.head(count)).cwiseAbs().maxCoeff();
        ritz = next;
        if (iter > 2 && drift < 1e-11 * std::max(1.0, ritz(count - 1))) break;
    }
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = ritz(i);
    return out;
}

}  // namespace

std::vector<double> lattice_magnetic_eigs(int d, int p, int grid_n, int count) {
    if (d == 0 || p == 0) throw domain_error("lattice_magnetic_eigs: need d*p != 0");
    if (grid_n < 16) throw domain_error("lattice_magnetic_eigs: grid_n must be >= 16");
    if (count < 1 || count > grid_n * grid_n) {
        throw domain_error("lattice_magnetic_eigs: bad count");
    }
    const double flux_per_plaquette = kTwoPi * std::abs(p * d) / (static_cast<double>(grid_n) * grid_n);
    if (flux_per_plaquette >= 0.5) {
        throw validation_error("lattice_magnetic_eigs: flux per plaquette too large for the "
                               "discretization to resolve Landau levels");
    }
    const SpMat H = build_hamiltonian(d, p, grid_n);
    auto eigs = (grid_n <= 32) ? dense_lowest(H, count) : iterative_lowest(H, count);
    const double shift = kTwoPi * p * d;
    for (double& e : eigs) e -= shift;
    std::sort(eigs.begin(), eigs.end());
    return eigs;
}

}  // namespace curvheat
