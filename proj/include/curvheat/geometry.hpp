#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "curvheat/errors.hpp"

namespace curvheat {

// Pointwise curvature data: eigenvalues of the curvature endomorphism relative
// to the metric, plus the quadrature weight for the volume form.
struct CurvaturePoint {
    std::vector<double> alphas;  // sorted ascending
    double weight = 0.0;
    std::optional<double> scalar_curvature;
    int rank_e = 1;
};

enum class GeometryKind { TorusDiag, CP1FubiniStudy, Sampled };

struct ModelGeometry {
    GeometryKind kind = GeometryKind::Sampled;
    int n = 0;
    int rank_e = 1;
    double volume = 0.0;
    std::vector<CurvaturePoint> points;

    // TorusDiag parameters (empty otherwise). degrees[j] may be 0 (flat factor).
    std::vector<int> degrees;
    std::vector<double> areas;
};

// Product of flat square tori, one factor per (degree, area); constant
// curvature alpha_j = 2 pi d_j / A_j.
ModelGeometry make_torus(const std::vector<int>& degrees, const std::vector<double>& areas);

// O(1)-quantized projective line: n=1, alpha = 2pi, Vol = 1, r^M = 8pi.
ModelGeometry make_cp1();

// Parse a sampled-geometry manifest (JSON: {"n":..,"rank_e":..,"points":[..]}).
ModelGeometry load_sampled(const std::string& text);
ModelGeometry load_sampled_stream(std::istream& in);

// Serialize back to the manifest format (17 significant digits).
std::string save_manifest(const ModelGeometry& geom);

// Quadrature: sum of f(point) * weight over the sample points.
double integrate(const ModelGeometry& geom,
                 const std::function<double(const CurvaturePoint&)>& f);

// True when every alpha_j equals 2pi within 1e-9 (Theta = omega normalization).
bool kahler_quantized(const ModelGeometry& geom);

}  // namespace curvheat
