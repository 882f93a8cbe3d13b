#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "curvheat/asymptotics.hpp"
#include "curvheat/heat_coeff.hpp"

using namespace curvheat;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kFourPi = 4.0 * kPi;

double slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}
}  // namespace

TEST_CASE("stationary_expand: flat case and order-0 contract") {
    const std::vector<double> flat{0.0, 0.0};
    for (int order : {0, 1, 2, 3}) {
        CHECK(stationary_expand(flat, 0.7, 12.0, order) ==
              doctest::Approx(std::pow(12.0 / (kFourPi * 0.7), 2)).epsilon(1e-15));
    }
    const std::vector<double> one{1.0};
    const double direct =
        (10.0 / (kFourPi * 0.5)) * phi0(one, {1.0, 0.0}).real();
    CHECK(stationary_expand(one, 0.5, 10.0, 0) == direct);  // same code path, bitwise
    CHECK_THROWS_AS(stationary_expand(one, 0.5, 10.0, 4), domain_error);
}

TEST_CASE("gaussian_reference: flat normalization and symmetry") {
    const std::vector<double> flat{0.0};
    const auto g = gaussian_reference(flat, 0.9, 20.0);
    CHECK(g.value == doctest::Approx(20.0 / (kFourPi * 0.9)).epsilon(1e-12));
    CHECK(g.imag_residual < 1e-14 * std::abs(g.value));
    CHECK(g.rel_error_estimate < 1e-12);

    const std::vector<double> mixed{1.0, -2.0};
    const auto gm = gaussian_reference(mixed, 0.5, 30.0);
    CHECK(gm.imag_residual < 1e-14 * std::abs(gm.value));

    const std::vector<double> big{10.0};
    CHECK_THROWS_AS(gaussian_reference(big, 5.0, 3.0), domain_error);  // pole inside window
}

TEST_CASE("stationary series converges to the quadrature with slope -(m+1)") {
    const std::vector<double> alphas{1.0};
    const double u = 0.5;
    const std::vector<double> ps{10.0, 20.0, 40.0, 80.0};
    for (int m : {0, 1, 2}) {
        std::vector<double> lx, ly;
        double prev_err = 1e300;
        for (double p : ps) {
            const auto ref = gaussian_reference(alphas, u, p);
            const double err =
                std::abs(ref.value - stationary_expand(alphas, u, p, m)) / std::abs(ref.value);
            CHECK(err < prev_err);
            prev_err = err;
            lx.push_back(std::log(p));
            ly.push_back(std::log(err));
        }
        CHECK(std::abs(slope(lx, ly) + (m + 1)) <= 0.3);
    }
    // Increasing the order shrinks the defect at fixed p.
    double prev = 1e300;
    for (int m : {0, 1, 2, 3}) {
        const auto ref = gaussian_reference(alphas, u, 25.0);
        const double err = std::abs(ref.value - stationary_expand(alphas, u, 25.0, m));
        CHECK(err < prev);
        prev = err;
    }
}

TEST_CASE("fit_coefficients recovers synthetic expansions exactly") {
    const int n = 1;
    const double u = 0.7;
    const std::vector<double> c{0.3, -0.2, 0.05};
    std::vector<HeatTraceSample> samples;
    for (int p : {8, 12, 16, 24, 32, 48, 64}) {
        double v = 0.0;
        for (int r = 0; r < 3; ++r) v += c[static_cast<std::size_t>(r)] * std::pow(p / u, n - r);
        samples.push_back({u, p, 0, v, 0.0});
    }
    const auto rep = fit_coefficients(samples, n, 2);
    for (int r = 0; r < 3; ++r) {
        CHECK(std::abs(rep.fitted[static_cast<std::size_t>(r)] - c[static_cast<std::size_t>(r)]) <=
              1e-10 * std::max(1.0, std::abs(c[static_cast<std::size_t>(r)])));
    }
    CHECK(rep.condition < 1e6);

    CHECK_THROWS_AS(fit_coefficients(std::vector<HeatTraceSample>(samples.begin(),
                                                                  samples.begin() + 3),
                                     n, 2),
                    domain_error);
    // Identical p values collapse the design matrix.
    std::vector<HeatTraceSample> degenerate(6, samples[0]);
    CHECK_THROWS_AS(fit_coefficients(degenerate, n, 2), conditioning_error);
}

TEST_CASE("torus expansion is exact: c0 matches, higher terms vanish") {
    const auto g = make_torus({1}, {1.0});
    const std::vector<int> ps{8, 12, 16, 24, 32, 48, 64};
    const auto rep = expansion_report(g, 0.5, ps, 1, 0);
    const std::vector<double> tp{kTwoPi};
    const double c0 = e0_trace(tp, 0.5, 0, 1);
    CHECK(std::abs(rep.fitted[0] - c0) <= 1e-10 * c0);
    CHECK(std::abs(rep.fitted[1]) < 1e-8);
    CHECK(rep.exponent_ok);
    CHECK(rep.max_remainder_rel <= 1e-12);
    CHECK_FALSE(rep.residual_order.has_value());  // remainder sits at roundoff
    REQUIRE(rep.predicted[0].has_value());
    CHECK(*rep.predicted[0] == doctest::Approx(c0).epsilon(1e-14));
    REQUIRE(rep.predicted[1].has_value());  // quantized with r^M = 0
    CHECK(*rep.predicted[1] == 0.0);
}

TEST_CASE("cp1 expansion: leading and subleading coefficients") {
    const auto cp1 = make_cp1();
    const std::vector<int> ps{32, 48, 64, 96, 128, 192, 256};
    const auto rep = expansion_report(cp1, 0.5, ps, 1, 0);
    const std::vector<double> tp{kTwoPi};
    const double c0 = e0_trace(tp, 0.5, 0, 1);
    CHECK(std::abs(rep.fitted[0] - c0) <= 1e-4 * c0);
    REQUIRE(rep.predicted[1].has_value());
    const double e1 = e1_kahler(0.5, 4.0 * kTwoPi, 1);
    CHECK(*rep.predicted[1] == doctest::Approx(e1).epsilon(1e-14));
    CHECK(std::abs(rep.fitted[1] - e1) <= 0.02 * std::abs(e1));
    CHECK(rep.exponent_ok);
}

TEST_CASE("cp1 residual decay orders at k = 0 and k = 1") {
    const auto cp1 = make_cp1();
    const std::vector<int> ps{32, 48, 64, 96, 128, 192, 256};
    const auto r0 = expansion_report(cp1, 0.5, ps, 0, 0);
    REQUIRE(r0.residual_order.has_value());
    CHECK(std::abs(*r0.residual_order - 0.0) <= 0.3);  // n - k - 1 = 0

    const auto r1 = expansion_report(cp1, 0.5, ps, 1, 0);
    REQUIRE(r1.residual_order.has_value());
    CHECK(std::abs(*r1.residual_order + 1.0) <= 0.3);  // n - k - 1 = -1
}
