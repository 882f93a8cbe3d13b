#include "curvheat/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "curvheat/analytic.hpp"
#include "curvheat/format.hpp"

namespace curvheat {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void validate_point(const CurvaturePoint& pt, std::size_t idx, int n) {
    if (static_cast<int>(pt.alphas.size()) != n) {
        throw validation_error("point " + std::to_string(idx) + ": alphas length " +
                               std::to_string(pt.alphas.size()) + " != n = " + std::to_string(n));
    }
    for (double a : pt.alphas) {
        if (!std::isfinite(a)) {
            throw validation_error("point " + std::to_string(idx) + ": non-finite alpha");
        }
    }
    if (!(pt.weight > 0.0) || !std::isfinite(pt.weight)) {
        throw validation_error("point " + std::to_string(idx) + ": weight must be positive");
    }
    if (pt.scalar_curvature && !std::isfinite(*pt.scalar_curvature)) {
        throw validation_error("point " + std::to_string(idx) + ": non-finite scalar_curvature");
    }
    if (pt.rank_e < 1) {
        throw validation_error("point " + std::to_string(idx) + ": rank_e must be >= 1");
    }
}

}  // namespace

ModelGeometry make_torus(const std::vector<int>& degrees, const std::vector<double>& areas) {
    if (degrees.empty() || degrees.size() != areas.size()) {
        throw domain_error("make_torus: need equal, nonempty degree and area lists");
    }
    if (static_cast<int>(degrees.size()) > kMaxDim) {
        throw domain_error("make_torus: dimension capped at 16");
    }
    ModelGeometry g;
    g.kind = GeometryKind::TorusDiag;
    g.n = static_cast<int>(degrees.size());
    g.degrees = degrees;
    g.areas = areas;
    g.volume = 1.0;
    CurvaturePoint pt;
    for (std::size_t j = 0; j < degrees.size(); ++j) {
        if (!(areas[j] > 0.0) || !std::isfinite(areas[j])) {
            throw domain_error("make_torus: areas must be positive");
        }
        g.volume *= areas[j];
        pt.alphas.push_back(kTwoPi * degrees[j] / areas[j]);
    }
    std::sort(pt.alphas.begin(), pt.alphas.end());
    pt.weight = g.volume;
    pt.scalar_curvature = 0.0;
    g.points.push_back(std::move(pt));
    return g;
}

ModelGeometry make_cp1() {
    ModelGeometry g;
    g.kind = GeometryKind::CP1FubiniStudy;
    g.n = 1;
    g.volume = 1.0;
    g.points.push_back(CurvaturePoint{{kTwoPi}, 1.0, 4.0 * kTwoPi, 1});
    return g;
}

ModelGeometry load_sampled(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw validation_error(std::string("manifest parse error: ") + e.what());
    }
    ModelGeometry g;
    g.kind = GeometryKind::Sampled;
    try {
        g.n = doc.at("n").get<int>();
        g.rank_e = doc.value("rank_e", 1);
        if (g.n < 1 || g.n > kMaxDim) {
            throw validation_error("manifest: n must be in 1..16");
        }
        if (g.rank_e < 1) {
            throw validation_error("manifest: rank_e must be >= 1");
        }
        const auto& pts = doc.at("points");
        if (!pts.is_array() || pts.empty()) {
            throw validation_error("manifest: points must be a nonempty array");
        }
        g.volume = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const auto& jp = pts[i];
            CurvaturePoint pt;
            pt.alphas = jp.at("alphas").get<std::vector<double>>();
            pt.weight = jp.at("weight").get<double>();
            if (jp.contains("scalar_curvature")) {
                pt.scalar_curvature = jp.at("scalar_curvature").get<double>();
            }
            pt.rank_e = g.rank_e;
            validate_point(pt, i, g.n);
            if (!std::is_sorted(pt.alphas.begin(), pt.alphas.end())) {
                std::sort(pt.alphas.begin(), pt.alphas.end());
            }
            g.volume += pt.weight;
            g.points.push_back(std::move(pt));
        }
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(std::string("manifest schema error: ") + e.what());
    }
    return g;
}

ModelGeometry load_sampled_stream(std::istream& in) {
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_sampled(ss.str());
}

std::string save_manifest(const ModelGeometry& geom) {
    nlohmann::json doc;
    doc["n"] = geom.n;
    doc["rank_e"] = geom.rank_e;
    auto& pts = doc["points"] = nlohmann::json::array();
    for (const auto& pt : geom.points) {
        nlohmann::json jp;
        auto& al = jp["alphas"] = nlohmann::json::array();
        for (double a : pt.alphas) al.push_back(nlohmann::json::parse(fmt17(a)));
        jp["weight"] = nlohmann::json::parse(fmt17(pt.weight));
        if (pt.scalar_curvature) {
            jp["scalar_curvature"] = nlohmann::json::parse(fmt17(*pt.scalar_curvature));
        }
        pts.push_back(std::move(jp));
    }
    return doc.dump(2) + "\n";
}

double integrate(const ModelGeometry& geom,
                 const std::function<double(const CurvaturePoint&)>& f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < geom.points.size(); ++i) {
        const double v = f(geom.points[i]);
        if (!std::isfinite(v)) {
            throw range_error("integrate: integrand non-finite at point " + std::to_string(i));
        }
        acc += v * geom.points[i].weight;
    }
    return acc;
}

bool kahler_quantized(const ModelGeometry& geom) {
    for (const auto& pt : geom.points) {
        for (double a : pt.alphas) {
            if (std::abs(a - kTwoPi) > 1e-9) return false;
        }
    }
    return !geom.points.empty();
}

}  // namespace curvheat
