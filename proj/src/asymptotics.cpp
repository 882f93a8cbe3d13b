#include "curvheat/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>

#include "curvheat/analytic.hpp"
#include "curvheat/heat_coeff.hpp"

namespace curvheat {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFourPi = 4.0 * std::numbers::pi;

// 20-point Gauss-Legendre nodes/weights on [-1, 1] (positive half; symmetric).
constexpr int kGlHalf = 10;
constexpr double kGlNode[kGlHalf] = {
    0.0765265211334973, 0.2277858511416451, 0.3737060887154195, 0.5108670019508271,
    0.6360536807265150, 0.7463319064601508, 0.8391169718222188, 0.9122344282513259,
    0.9639719272779138, 0.9931285991850949};
constexpr double kGlWeight[kGlHalf] = {
    0.1527533871307258, 0.1491729864726037, 0.1420961093183820, 0.1316886384491766,
    0.1181945319615184, 0.1019301198172404, 0.0832767415767048, 0.0626720483341091,
    0.0406014298003869, 0.0176140071391521};

// Linear regression slope of y against x.
double regression_slope(std::span<const double> x, std::span<const double> y) {
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

double stationary_expand(std::span<const double> alphas, double u, double p, int order) {
    if (order < 0 || order > 3) throw domain_error("stationary_expand: order must be 0..3");
    if (!(p > 0.0)) throw domain_error("stationary_expand: p must be positive");
    const int n = static_cast<int>(alphas.size());
    const auto derivs = phi0_theta_derivs(alphas, u, 2 * order);
    double sum = 0.0;
    double factor = 1.0;  // (u/p)^k / k!
    for (int k = 0; k <= order; ++k) {
        if (k > 0) factor *= u / (p * k);
        sum += factor * derivs[static_cast<std::size_t>(2 * k)].real();
    }
    return std::pow(p / (kFourPi * u), n) * sum;
}

GaussianQuad gaussian_reference(std::span<const double> alphas, double u, double p) {
    if (!(p > 0.0) || !(u > 0.0)) throw domain_error("gaussian_reference: need p, u > 0");
    const int n = static_cast<int>(alphas.size());
    const double theta_max = std::sqrt(4.0 * u * std::log(1e18) / p);
    double amax = 0.0;
    for (double a : alphas) amax = std::max(amax, std::abs(a));
    if (theta_max * amax / 2.0 >= kPi - 1e-3) {
        throw domain_error("gaussian_reference: Phi0 pole inside the quadrature window");
    }

    auto integrate_panels = [&](int panels) {
        std::complex<double> acc = 0.0;
        const double w = 2.0 * theta_max / panels;  // window [-theta_max, theta_max]
        for (int s = 0; s < panels; ++s) {
            const double mid = -theta_max + (s + 0.5) * w;
            for (int i = 0; i < kGlHalf; ++i) {
                for (double sign : {-1.0, 1.0}) {
                    const double theta = mid + sign * kGlNode[i] * w / 2.0;
                    acc += kGlWeight[i] *
                           phi0(alphas, {2.0 * u, theta}) * std::exp(-p * theta * theta / (4.0 * u));
                }
            }
        }
        return acc * (w / 2.0);
    };

    std::complex<double> prev = integrate_panels(2);
    std::complex<double> cur = prev;
    double err = 1.0;
    for (int panels = 4; panels <= 512; panels *= 2) {
        cur = integrate_panels(panels);
        err = std::abs(cur - prev) / std::max(1e-300, std::abs(cur));
        prev = cur;
        if (err < 1e-13) break;
    }
    GaussianQuad out;
    const double norm = std::pow(p / (kFourPi * u), n + 0.5);
    out.value = norm * cur.real();
    out.imag_residual = std::abs(norm * cur.imag());
    out.rel_error_estimate = err;
    return out;
}

ExpansionReport fit_coefficients(std::span<const HeatTraceSample> samples, int n, int k,
                                 std::vector<std::optional<double>> predicted) {
    if (static_cast<int>(samples.size()) < k + 3) {
        throw domain_error("fit_coefficients: need at least k+3 distinct p values");
    }
    const double u = samples[0].u;
    const int rows = static_cast<int>(samples.size());
    Eigen::MatrixXd X(rows, k + 1);
    Eigen::VectorXd y(rows);
    for (int i = 0; i < rows; ++i) {
        const auto& s = samples[static_cast<std::size_t>(i)];
        if (std::abs(s.u - u) > 1e-12 * std::max(1.0, std::abs(u))) {
            throw domain_error("fit_coefficients: samples must share one u");
        }
        y(i) = s.value;
        for (int r = 0; r <= k; ++r) {
            X(i, r) = std::pow(s.p / u, n - r);
        }
    }
    // Column scaling keeps the tiny high-r columns visible to the solver.
    Eigen::VectorXd scale(k + 1);
    for (int r = 0; r <= k; ++r) {
        scale(r) = X.col(r).norm();
        if (!(scale(r) > 0.0)) throw conditioning_error("fit_coefficients: zero design column");
        X.col(r) /= scale(r);
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    const double smax = svd.singularValues()(0);
    if (smin < 1e-13 * smax) {
        throw conditioning_error(
            "fit_coefficients: rank-deficient design matrix; widen the p grid");
    }
    const Eigen::VectorXd c = svd.solve(y);

    ExpansionReport rep;
    rep.n = n;
    rep.u = u;
    rep.q = samples[0].q;
    for (const auto& s : samples) rep.p_grid.push_back(s.p);
    for (int r = 0; r <= k; ++r) rep.fitted.push_back(c(r) / scale(r));
    rep.condition = smax / smin;
    predicted.resize(static_cast<std::size_t>(k) + 1);
    rep.predicted = std::move(predicted);

    // Remainder after subtracting the best-available coefficients (closed form
    // where it exists, fitted otherwise); its slope in p/u is the decay order.
    std::vector<double> logs_x, logs_y, rem(static_cast<std::size_t>(rows));
    double leading = 0.0;
    for (int i = 0; i < rows; ++i) {
        const auto& s = samples[static_cast<std::size_t>(i)];
        double model = 0.0;
        for (int r = 0; r <= k; ++r) {
            const double cr = rep.predicted[static_cast<std::size_t>(r)]
                                  ? *rep.predicted[static_cast<std::size_t>(r)]
                                  : rep.fitted[static_cast<std::size_t>(r)];
            model += cr * std::pow(s.p / u, n - r);
        }
        rem[static_cast<std::size_t>(i)] = s.value - model;
        leading = std::max(leading, std::abs(s.value));
    }
    rep.max_remainder_rel = std::abs(rem.back()) / std::max(1e-300, leading);

    const int half = rows / 2;
    bool monotone = true;
    for (int i = half; i < rows; ++i) {
        if (i > half && !(std::abs(rem[static_cast<std::size_t>(i)]) <
                          std::abs(rem[static_cast<std::size_t>(i - 1)]) * (1.0 + 1e-9))) {
            monotone = false;
        }
        logs_x.push_back(std::log(samples[static_cast<std::size_t>(i)].p / u));
        logs_y.push_back(std::log(std::max(1e-300, std::abs(rem[static_cast<std::size_t>(i)]))));
    }
    if (monotone) rep.residual_order = regression_slope(logs_x, logs_y);
    return rep;
}

ExpansionReport expansion_report(const ModelGeometry& geom, double u, std::span<const int> p_grid,
                                 int k, int q) {
    if (p_grid.size() < static_cast<std::size_t>(k) + 3) {
        throw domain_error("expansion_report: p grid too short for the requested depth");
    }
    const int pmax = *std::max_element(p_grid.begin(), p_grid.end());
    const double t_min = u / pmax;

    std::vector<HeatTraceSample> samples;
    for (int p : p_grid) {
        GradedTrace tr;
        if (geom.kind == GeometryKind::TorusDiag) {
            tr = model_graded_trace(geom, p, q, u / p);
        } else {
            const auto series = cp1_spectrum(p, q, cp1_suggested_cutoff(p, q, t_min));
            const auto sample = heat_trace(series, u / p);
            tr = {sample.value, sample.truncation_bound};
        }
        HeatTraceSample s;
        s.u = u;
        s.p = p;
        s.q = q;
        s.value = tr.value / geom.volume;  // per unit volume
        s.truncation_bound = tr.bound / geom.volume;
        samples.push_back(s);
    }

    std::vector<std::optional<double>> predicted(static_cast<std::size_t>(k) + 1);
    predicted[0] = integrate(geom, [&](const CurvaturePoint& pt) {
                       return e0_trace(pt.alphas, u, q, pt.rank_e);
                   }) / geom.volume;
    if (k >= 1 && q == 0 && kahler_quantized(geom)) {
        bool have_r = true;
        for (const auto& pt : geom.points) have_r = have_r && pt.scalar_curvature.has_value();
        if (have_r) {
            predicted[1] = integrate(geom, [&](const CurvaturePoint& pt) {
                               return pt.rank_e * e1_kahler(pt.alphas, u, *pt.scalar_curvature);
                           }) / geom.volume;
        }
    }

    ExpansionReport rep = fit_coefficients(samples, geom.n, k, std::move(predicted));
    const double target = static_cast<double>(geom.n - k - 1);
    if (rep.max_remainder_rel <= 1e-11) {
        rep.exponent_ok = true;  // exact model: remainder at roundoff
    } else if (rep.residual_order && std::abs(*rep.residual_order - target) <= 0.3) {
        rep.exponent_ok = true;
    }
    if (!rep.exponent_ok) {
        throw verification_error(
            "expansion_report: remainder decay order violated at q = " + std::to_string(q) +
            ", u = " + std::to_string(u) + " (measured " +
            (rep.residual_order ? std::to_string(*rep.residual_order) : std::string("n/a")) +
            ", expected " + std::to_string(target) + ")");
    }
    return rep;
}

}  // namespace curvheat
