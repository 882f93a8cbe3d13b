#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "curvheat/heat_coeff.hpp"
#include "curvheat/spectral.hpp"

using namespace curvheat;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kFourPi = 4.0 * kPi;
}  // namespace

TEST_CASE("torus_spectrum ladder structure") {
    const auto g = make_torus({1}, {1.0});
    const auto s = torus_spectrum(g, 1, 0, 30.0);
    REQUIRE(s.levels.size() >= 2);
    CHECK(s.levels[0].lambda == 0.0);
    CHECK(s.levels[0].multiplicity == 1.0);
    CHECK(s.levels[1].lambda == doctest::Approx(kFourPi).epsilon(1e-12));
    CHECK(s.levels[1].multiplicity == 1.0);

    // Negative degree: no q=0 kernel, gap 2*2pi; q=1 kernel of dimension p.
    const auto gneg = make_torus({-1}, {1.0});
    const auto s0 = torus_spectrum(gneg, 3, 0, 100.0);
    CHECK(s0.levels[0].lambda == doctest::Approx(2.0 * kTwoPi * 3).epsilon(1e-12));
    const auto s1 = torus_spectrum(gneg, 3, 1, 100.0);
    CHECK(s1.levels[0].lambda == 0.0);
    CHECK(s1.levels[0].multiplicity == 3.0);

    CHECK_THROWS_AS(torus_spectrum(make_torus({0}, {1.0}), 2, 0, 10.0), domain_error);
}

TEST_CASE("torus kernel dimensions match the exact cohomology") {
    for (int d : {-3, -2, -1, 1, 2, 3}) {
        const auto g = make_torus({d}, {1.0});
        for (int p : {1, 2, 5, 11, 20}) {
            for (int q = 0; q <= 1; ++q) {
                const long long h = exact_hq(g, p, q);
                const auto s = torus_spectrum(g, p, q, 10.0 + kFourPi * p * std::abs(d));
                const double ker =
                    (!s.levels.empty() && s.levels[0].lambda == 0.0) ? s.levels[0].multiplicity
                                                                     : 0.0;
                CHECK(ker == static_cast<double>(h));
            }
        }
    }
    // Two-factor model: cohomology concentrates in bidegree (#negative factors).
    const auto g2 = make_torus({1, -2}, {1.0, 1.0});
    CHECK(exact_hq(g2, 3, 1) == 3 * 1 * 3 * 2);
    CHECK(exact_hq(g2, 3, 0) == 0);
    CHECK(exact_hq(g2, 3, 2) == 0);
}

TEST_CASE("exact_hq examples") {
    CHECK(exact_hq(make_torus({1}, {1.0}), 7, 0) == 7);
    CHECK(exact_hq(make_torus({-2}, {1.0}), 3, 1) == 6);
    CHECK(exact_hq(make_torus({-2}, {1.0}), 3, 0) == 0);
    CHECK(exact_hq(make_cp1(), 5, 0) == 6);
    CHECK(exact_hq(make_cp1(), 5, 1) == 0);
    CHECK_THROWS_AS(exact_hq(make_torus({1, 0}, {1.0, 1.0}), 2, 0), domain_error);
}

TEST_CASE("heat_trace basics") {
    SpectrumSeries s;
    s.p = 1;
    s.q = 0;
    s.cutoff = 1e9;
    s.levels = {{0.0, 4.0}};
    CHECK(heat_trace(s, 0.1).value == doctest::Approx(4.0));
    CHECK(heat_trace(s, 10.0).value == doctest::Approx(4.0));

    const auto g = make_torus({1}, {1.0});
    const double t = 0.5 / 10.0;
    const auto series = torus_spectrum(g, 10, 0, suggested_cutoff(g, 10, 0, t));
    const auto sample = heat_trace(series, t);
    CHECK(sample.value == doctest::Approx(10.018709365986606441).epsilon(1e-13));
    CHECK(sample.truncation_bound < 1e-13 * sample.value);

    // Monotone decreasing in t.
    double prev = 1e300;
    for (double tt : {0.01, 0.05, 0.2, 1.0}) {
        const double v = heat_trace(series, tt).value;
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("central oracle identity: torus trace per volume = (p/u)^n e0_trace") {
    for (const auto& degrees : {std::vector<int>{1}, {-1}, {2}}) {
        const auto g = make_torus(degrees, std::vector<double>(degrees.size(), 1.0));
        for (int p : {3, 10}) {
            for (double u : {0.2, 1.0, 2.0}) {
                for (int q = 0; q <= g.n; ++q) {
                    const double t = u / p;
                    const auto s = torus_spectrum(g, p, q, suggested_cutoff(g, p, q, t));
                    const auto tr = heat_trace(s, t);
                    const double pred = std::pow(p / u, g.n) *
                                        e0_trace(g.points[0].alphas, u, q, 1) * g.volume;
                    CHECK(std::abs(tr.value / g.volume - pred / g.volume) <=
                          1e-12 * std::abs(pred) + tr.truncation_bound);
                }
            }
        }
    }
    // Two-dimensional product model.
    const auto g2 = make_torus({1, 1}, {1.0, 1.0});
    const auto s2 = torus_spectrum(g2, 4, 1, suggested_cutoff(g2, 4, 1, 0.25));
    const auto tr2 = heat_trace(s2, 0.25);
    const double pred2 = std::pow(4.0 / 1.0, 2) * e0_trace(g2.points[0].alphas, 1.0, 1, 1);
    CHECK(std::abs(tr2.value - pred2) <= 1e-12 * pred2 + tr2.truncation_bound);
}

TEST_CASE("torus closed-form graded trace matches the enumerated series") {
    const auto g = make_torus({2, -1}, {1.5, 0.8});
    for (int q = 0; q <= 2; ++q) {
        const double t = 0.13;
        const auto s = torus_spectrum(g, 3, q, suggested_cutoff(g, 3, q, t));
        // Raw truncated ladder sum (independent of the closed-form tail path).
        double raw = 0.0;
        for (auto it = s.levels.rbegin(); it != s.levels.rend(); ++it) {
            raw += it->multiplicity * std::exp(-t * it->lambda);
        }
        const double closed = torus_graded_trace(g, 3, q, t);
        CHECK(std::abs(raw - closed) <= 1e-12 * closed);
        CHECK(heat_trace(s, t).value == doctest::Approx(closed).epsilon(1e-14));
    }
}

TEST_CASE("free_factor_trace limits and truncated-sum oracle") {
    CHECK(free_factor_trace(1.0, 50.0) == doctest::Approx(1.0).epsilon(1e-15));
    const double t = 1e-4;
    CHECK(free_factor_trace(2.0, t) == doctest::Approx(2.0 / (kFourPi * t)).epsilon(1e-12));

    // Direct 4-fold symmetric lattice sum truncated at |m| <= 40.
    double direct = 0.0;
    for (int m1 = -40; m1 <= 40; ++m1) {
        for (int m2 = -40; m2 <= 40; ++m2) {
            direct += std::exp(-0.1 * 4.0 * kPi * kPi * (m1 * m1 + m2 * m2));
        }
    }
    CHECK(free_factor_trace(1.0, 0.1) == doctest::Approx(direct).epsilon(1e-14));
    CHECK(free_factor_trace(1.0, 0.1) ==
          doctest::Approx(1.07867517684064956).epsilon(1e-14));
}

TEST_CASE("mixed flat factors: supertrace cancels exactly") {
    const auto g = make_torus({1, 0}, {1.0, 2.0});
    const double t = 0.07;
    double super = 0.0;
    for (int q = 0; q <= 2; ++q) {
        super += ((q % 2 == 0) ? 1.0 : -1.0) * torus_graded_trace(g, 4, q, t);
    }
    CHECK(std::abs(super) < 1e-12);
    CHECK(mckean_singer(g, 4, 0.5) == doctest::Approx(0.0));
}

TEST_CASE("cp1_spectrum structure and truncation honesty") {
    const auto s5 = cp1_spectrum(5, 0, 1e4);
    CHECK(s5.levels[0].lambda == 0.0);
    CHECK(s5.levels[0].multiplicity == 6.0);
    const auto s5q1 = cp1_spectrum(5, 1, 1e4);
    CHECK(s5q1.levels[0].lambda > 0.0);

    // Truncated trace within truncation_bound of a much deeper truncation.
    const double t = 0.1;
    const auto shallow = cp1_spectrum(5, 0, 400.0);
    const auto deep = cp1_spectrum(5, 0, 4000.0);
    const auto a = heat_trace(shallow, t);
    const auto b = heat_trace(deep, t);
    CHECK(std::abs(a.value - b.value) <= a.truncation_bound);
    CHECK(a.truncation_bound > 0.0);
}

TEST_CASE("mckean_singer equals the Euler characteristic") {
    for (double u : {0.2, 1.0, 5.0}) {
        CHECK(mckean_singer(make_torus({1}, {1.0}), 7, u) == doctest::Approx(7.0).epsilon(1e-12));
        CHECK(mckean_singer(make_cp1(), 5, u) == doctest::Approx(6.0).epsilon(1e-10));
    }
    CHECK(mckean_singer(make_torus({1, 1}, {1.0, 1.0}), 4, 1.0) ==
          doctest::Approx(16.0).epsilon(1e-12));
    CHECK(mckean_singer(make_torus({-2}, {1.0}), 3, 0.7) == doctest::Approx(-6.0).epsilon(1e-12));
}

TEST_CASE("fourier relation: spectral identity holds and corruption is caught") {
    const auto torus = make_torus({1}, {1.0});
    CHECK(fourier_relation_check(torus, 5, 0.5) < 1e-10 * 10.0);
    CHECK(fourier_relation_check(torus, 1, 0.1) < 1e-10 * 10.0);
    CHECK(fourier_relation_check(make_cp1(), 3, 0.5) < 1e-10 * 10.0);

    // Corrupt one multiplicity in the fiber-side assembly only: the Fourier
    // coefficient now disagrees with the direct trace by the injected defect.
    const int p = 4;
    const double u = 0.5;
    auto clean = bochner_spectrum_provider(torus, p, u);
    GradedSpectrumProvider corrupt = [p, clean](int mode) {
        auto levels = clean(mode);
        if (mode == p && !levels.empty()) levels[0].multiplicity += 1.0;
        return levels;
    };
    CHECK(fourier_relation_deviation(clean, corrupt, p, u) > 1e-3);
}

TEST_CASE("SpectrumSeries structural invariants") {
    const auto check_series = [](const SpectrumSeries& s) {
        double prev = -1.0;
        for (const auto& lv : s.levels) {
            CHECK(lv.lambda >= 0.0);
            CHECK(lv.lambda > prev);  // ascending, distinct
            CHECK(lv.multiplicity >= 1.0);
            CHECK(lv.lambda <= s.cutoff);
            prev = lv.lambda;
        }
    };
    const auto torus = torus_spectrum(make_torus({2, -1}, {1.0, 1.5}), 3, 1, 500.0);
    check_series(torus);
    CHECK(torus.exact_tail);  // ladder tail is summable in closed form
    const auto sphere = cp1_spectrum(4, 0, 2000.0);
    check_series(sphere);
    CHECK_FALSE(sphere.exact_tail);  // tail only majorized
}

TEST_CASE("cp1 Weyl counting at adaptive depth") {
    for (int p : {1, 5, 10}) {
        const int K = 60;
        const double lambda = kFourPi * K * (static_cast<double>(p) + K + 1) * (1 + 1e-12);
        const auto s = cp1_spectrum(p, 0, lambda);
        double count = 0.0;
        for (const auto& lv : s.levels) count += lv.multiplicity;
        CHECK(std::abs(count * kFourPi / lambda - 1.0) <= 0.05);
    }
}
