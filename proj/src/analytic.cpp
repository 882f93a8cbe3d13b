#include "curvheat/analytic.hpp"

#include <cmath>

namespace curvheat {

namespace {

constexpr double kSeriesSwitch = 1e-3;  // truncation < 1e-17 at this threshold

void check_scalar_args(double a, double u) {
    if (!std::isfinite(a) || !std::isfinite(u)) {
        throw domain_error("non-finite argument");
    }
    if (u <= 0.0) {
        throw domain_error("u must be positive");
    }
}

}  // namespace

double sinhc_inv(double a, double u) {
    check_scalar_args(a, u);
    const double x = u * a;
    if (std::abs(x) < kSeriesSwitch) {
        const double x2 = x * x;
        // x/sinh(x) = 1 - x^2/6 + 7x^4/360 - ...
        return 1.0 + x2 * (-1.0 / 6.0 + x2 * (7.0 / 360.0));
    }
    return x / std::sinh(x);
}

double landau_factor(double a, double u) {
    check_scalar_args(a, u);
    const double x = u * a;
    if (std::abs(x) < kSeriesSwitch) {
        const double x2 = x * x;
        // x/(1-e^{-2x}) = 1/2 + x/2 + x^2/6 - x^4/90 + ...
        return 0.5 + 0.5 * x + x2 * (1.0 / 6.0 - x2 / 90.0);
    }
    return x / -std::expm1(-2.0 * x);
}

std::complex<double> sinhc_inv_complex(std::complex<double> w) {
    if (std::abs(w) < kSeriesSwitch) {
        const std::complex<double> w2 = w * w;
        return 1.0 + w2 * (-1.0 / 6.0 + w2 * (7.0 / 360.0));
    }
    return w / std::sinh(w);
}

std::vector<MultiIndex> subsets_of_size(int n, int q) {
    if (n < 0 || n > kMaxDim || q < 0 || q > n) {
        throw domain_error("subsets_of_size: need 0 <= q <= n <= 16");
    }
    std::vector<MultiIndex> out;
    out.reserve(static_cast<std::size_t>(binomial(n, q)));
    if (q == 0) {
        out.push_back({0u, n});
        return out;
    }
    // Gosper's hack walks masks of fixed popcount in ascending order.
    std::uint32_t v = (1u << q) - 1;
    const std::uint32_t limit = (n == 32) ? ~0u : (1u << n);
    while (v < limit) {
        out.push_back({v, n});
        const std::uint32_t t = v | (v - 1);
        v = (t + 1) | (((~t & (t + 1)) - 1) >> (__builtin_ctz(v) + 1));
    }
    return out;
}

double alpha_sum(std::span<const double> alphas, MultiIndex J) {
    double s = 0.0;
    for (int j = 1; j <= J.n; ++j) {
        if (J.contains(j)) s += alphas[static_cast<std::size_t>(j - 1)];
    }
    return s;
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) {
        r *= static_cast<double>(n - k + i) / static_cast<double>(i);
    }
    return std::round(r);
}

HermitianPair::HermitianPair(Eigen::MatrixXcd r, Eigen::MatrixXcd g)
    : R(std::move(r)), G(std::move(g)) {
    if (R.rows() != R.cols() || G.rows() != G.cols() || R.rows() != G.rows()) {
        throw domain_error("HermitianPair: R and G must be square of equal size");
    }
    if (R.rows() < 1 || R.rows() > kMaxDim) {
        throw domain_error("HermitianPair: dimension must be in 1..16");
    }
    const double scale = std::max(1.0, std::max(R.norm(), G.norm()));
    if ((R - R.adjoint()).norm() > 1e-12 * scale) {
        throw validation_error("HermitianPair: R is not Hermitian");
    }
    if ((G - G.adjoint()).norm() > 1e-12 * scale) {
        throw validation_error("HermitianPair: G is not Hermitian");
    }
}

std::vector<double> curvature_eigenvalues(const HermitianPair& pair) {
    const auto n = pair.G.rows();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> gs(pair.G, Eigen::EigenvaluesOnly);
    const double gmin = gs.eigenvalues().minCoeff();
    const double gmax = gs.eigenvalues().maxCoeff();
    if (!(gmin > 1e-12 * gmax)) {
        throw conditioning_error("curvature_eigenvalues: G not positive definite, min eigenvalue " +
                                 std::to_string(gmin));
    }
    Eigen::LLT<Eigen::MatrixXcd> llt(pair.G);
    const Eigen::MatrixXcd L = llt.matrixL();
    // A = L^{-1} R L^{-*} is Hermitian with the generalized eigenvalues of (R, G).
    Eigen::MatrixXcd A = L.triangularView<Eigen::Lower>().solve(pair.R);
    A = L.triangularView<Eigen::Lower>().solve(A.adjoint().eval()).adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A, Eigen::EigenvaluesOnly);
    std::vector<double> out(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    return out;
}

}  // namespace curvheat
