#include "curvheat/morse.hpp"

#include <cmath>
#include <numbers>

#include "curvheat/heat_coeff.hpp"
#include "curvheat/spectral.hpp"

namespace curvheat {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Signed density prod_j alpha_j / (2 pi).
double curvature_density(const CurvaturePoint& pt) {
    double prod = 1.0;
    for (double a : pt.alphas) prod *= a / kTwoPi;
    return prod;
}

BoundValue morse_integral(const ModelGeometry& geom, int q, double zero_tol, bool cumulative) {
    if (q < 0 || q > geom.n) throw domain_error("morse bound: need 0 <= q <= n");
    if (!(zero_tol > 0.0)) throw domain_error("morse bound: zero_tol must be positive");
    BoundValue out;
    double deg_weight = 0.0;
    const double sign = (q % 2 == 0) ? 1.0 : -1.0;
    out.value = integrate(geom, [&](const CurvaturePoint& pt) {
        const auto cls = classify(pt.alphas, zero_tol);
        if (cls.degenerate) {
            deg_weight += pt.weight;  // measure-zero by assumption; contributes 0
            return 0.0;
        }
        const bool in_set = cumulative ? (cls.q <= q) : (cls.q == q);
        if (!in_set) return 0.0;
        return pt.rank_e * sign * curvature_density(pt);
    });
    out.degenerate_weight_fraction = deg_weight / geom.volume;
    out.coverage_warning = out.degenerate_weight_fraction > 0.10;
    return out;
}

}  // namespace

Classification classify(std::span<const double> alphas, double zero_tol) {
    if (!(zero_tol > 0.0)) throw domain_error("classify: zero_tol must be positive");
    Classification c;
    for (double a : alphas) {
        if (std::abs(a) <= zero_tol) {
            ++c.n_zero;
        } else if (a < 0.0) {
            ++c.n_minus;
        } else {
            ++c.n_plus;
        }
    }
    c.degenerate = c.n_zero > 0;
    c.q = c.degenerate ? -1 : c.n_minus;
    return c;
}

BoundValue weak_bound(const ModelGeometry& geom, int q, double zero_tol) {
    return morse_integral(geom, q, zero_tol, /*cumulative=*/false);
}

BoundValue strong_bound(const ModelGeometry& geom, int q, double zero_tol) {
    return morse_integral(geom, q, zero_tol, /*cumulative=*/true);
}

double u_bound(const ModelGeometry& geom, int q, double u) {
    if (!(u > 0.0)) throw domain_error("u_bound: u must be positive");
    if (q < 0 || q > geom.n) throw domain_error("u_bound: need 0 <= q <= n");
    const double un = std::pow(u, -geom.n);
    return integrate(geom, [&](const CurvaturePoint& pt) {
        double alt = 0.0;
        for (int j = 0; j <= q; ++j) {
            const double sign = ((q - j) % 2 == 0) ? 1.0 : -1.0;
            alt += sign * e0_trace(pt.alphas, u, j, 1);
        }
        return pt.rank_e * un * alt;
    });
}

MorseReport verify_inequalities(const ModelGeometry& geom, int p, double u) {
    if (p < 1) throw domain_error("verify_inequalities: p must be >= 1");
    MorseReport rep;
    rep.p = p;
    rep.u = u;
    rep.n = geom.n;
    const double t = u / p;
    const double pn = std::pow(static_cast<double>(p), geom.n);

    std::vector<double>& ub = rep.u_bounds[u];
    for (int q = 0; q <= geom.n; ++q) {
        rep.weak.push_back(weak_bound(geom, q).value);
        rep.strong.push_back(strong_bound(geom, q).value);
        ub.push_back(u_bound(geom, q, u));
        const auto tr = model_graded_trace(geom, p, q, t);
        rep.traces.push_back(tr.value);
        rep.trace_bounds.push_back(tr.bound);
        rep.exact_dims.push_back(exact_hq(geom, p, q));
    }

    rep.all_pass = true;
    auto push = [&rep](InequalityCheck c) {
        rep.all_pass = rep.all_pass && c.pass;
        rep.checks.push_back(std::move(c));
    };

    for (int q = 0; q <= geom.n; ++q) {
        const double h = static_cast<double>(rep.exact_dims[static_cast<std::size_t>(q)]);
        const double tr = rep.traces[static_cast<std::size_t>(q)];
        const double trb = rep.trace_bounds[static_cast<std::size_t>(q)];

        // (a) h^q <= tr_q
        push({"dim<=trace", q, h, tr, tr - h, h <= tr + trb + 1e-12});

        // (b) alternating partial sums, with equality at q = n
        double alt_h = 0.0, alt_tr = 0.0, alt_b = 0.0;
        for (int j = 0; j <= q; ++j) {
            const double sign = ((q - j) % 2 == 0) ? 1.0 : -1.0;
            alt_h += sign * static_cast<double>(rep.exact_dims[static_cast<std::size_t>(j)]);
            alt_tr += sign * rep.traces[static_cast<std::size_t>(j)];
            alt_b += rep.trace_bounds[static_cast<std::size_t>(j)];
        }
        push({"alternating", q, alt_h, alt_tr, alt_tr - alt_h,
              alt_h <= alt_tr + alt_b + 1e-12});
        if (q == geom.n) {
            const double dev = std::abs(alt_h - alt_tr);
            push({"equality@n", q, alt_h, alt_tr, dev,
                  dev <= alt_b + 1e-8 * std::max(1.0, std::abs(alt_h))});
        }

        // (c) scaled alternating dimensions against the u-dependent bound,
        // with a 2/p band standing in for the o(1) of the limsup statement.
        const double lhs = alt_h / pn;
        const double rhs = ub[static_cast<std::size_t>(q)];
        const double band = 2.0 / p * std::max(1.0, std::abs(rhs));
        push({"u-bound", q, lhs, rhs, rhs - lhs, lhs <= rhs + band + alt_b / pn + 1e-12});
    }
    return rep;
}

}  // namespace curvheat
