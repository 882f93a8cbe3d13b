#pragma once

#include <functional>
#include <span>
#include <vector>

#include "curvheat/geometry.hpp"

namespace curvheat {

struct SpectrumLevel {
    double lambda = 0.0;
    double multiplicity = 0.0;  // integer-valued; double to hold big degeneracy products
};

// Truncated spectrum of D_p^2 restricted to degree q.
struct SpectrumSeries {
    int p = 1;
    int q = 0;
    std::vector<SpectrumLevel> levels;  // ascending, distinct
    double cutoff = 0.0;
    bool exact_tail = false;

    // Tail-majorant metadata so heat traces can bound the truncated part.
    enum class TailKind { None, TorusLadder, Cp1Ladder };
    TailKind tail_kind = TailKind::None;
    std::vector<int> degrees;
    std::vector<double> areas;
};

struct HeatTraceSample {
    double u = 0.0;  // u = t * p
    int p = 1;
    int q = 0;
    double value = 0.0;
    double truncation_bound = 0.0;
};

// Harmonic-ladder spectrum of D_p^2 on a product torus; requires all d_j != 0
// (flat factors go through torus_graded_trace instead).
SpectrumSeries torus_spectrum(const ModelGeometry& torus, int p, int q, double cutoff);

// Spectrum of D_p^2 on O(p) over the quantized projective line; derived
// constants are gated by a validation battery on first use.
SpectrumSeries cp1_spectrum(int p, int q, double cutoff);

// sum multiplicity * exp(-t lambda) over the series, plus the analytic tail
// when exact_tail; otherwise the truncation_bound carries a geometric
// multiplicity-weighted tail estimate.
HeatTraceSample heat_trace(const SpectrumSeries& s, double t);

// Exact flat-torus heat trace for one d = 0 factor of the given area.
double free_factor_trace(double area, double t);

// Closed-form graded trace tr_q exp(-t D_p^2) on a product torus; supports
// flat (d_j = 0) factors via theta sums. Exact, no truncation.
double torus_graded_trace(const ModelGeometry& torus, int p, int q, double t);

// Graded trace for any built-in model: {value, truncation_bound}.
struct GradedTrace {
    double value = 0.0;
    double bound = 0.0;
};
GradedTrace model_graded_trace(const ModelGeometry& geom, int p, int q, double t);

// Cutoff making the multiplicity-weighted tail < 1e-14 * trace at t_min.
double suggested_cutoff(const ModelGeometry& geom, int p, int q, double t_min);
double cp1_suggested_cutoff(int p, int q, double t_min);

// Alternating sum of graded heat traces; checked against the holomorphic
// Euler characteristic and returned.
double mckean_singer(const ModelGeometry& geom, int p, double u);

// Holomorphic Euler characteristic of the model.
long long euler_characteristic(const ModelGeometry& geom, int p);

// Exact Dolbeault cohomology dimension h^q(L^p) for the built-in models.
long long exact_hq(const ModelGeometry& geom, int p, int q);

// Bochner-Laplacian spectrum provider for Fourier mode m (levels within cutoff).
using GradedSpectrumProvider = std::function<std::vector<SpectrumLevel>(int mode)>;

// Deviation between the direct Bochner heat trace at tensor power p and its
// reconstruction as the p-th Fourier coefficient of the fiber-rotated
// Kaluza-Klein trace, both assembled from the same graded spectra. The
// two-provider overload lets tests corrupt one assembly route only.
double fourier_relation_deviation(const GradedSpectrumProvider& provider, int p, double u);
double fourier_relation_deviation(const GradedSpectrumProvider& direct_side,
                                  const GradedSpectrumProvider& fiber_side, int p, double u);
double fourier_relation_check(const ModelGeometry& geom, int p, double u);

// Provider for the built-in models (exposed for the corrupted-data negative test).
GradedSpectrumProvider bochner_spectrum_provider(const ModelGeometry& geom, int p, double u);

}  // namespace curvheat
