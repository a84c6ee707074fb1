#pragma once

// Sup-norm decay measurements, log-log exponent fits, rate predictions from
// surface geometry and the L2 boundedness checks.

#include <complex>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fresnel/oscint.hpp"
#include "fresnel/phase.hpp"
#include "fresnel/surface.hpp"

namespace fresnel {

double measure_sup(std::span<const cplx> values);
double measure_sup(std::span<const double> values);

struct DecaySeries {
    std::vector<double> t;
    std::vector<double> s;
    std::string scenario;
    std::string ray;  // description of the evaluation set
    double besov_norm = 0.0;

    void add(double time, double sup);
    /// Throws DataError unless t is strictly increasing and s > 0.
    void validate() const;
};

struct FitWindow {
    double t_min = 0.0;
    double t_max = std::numeric_limits<double>::infinity();
};

struct DecayFit {
    double exponent = 0.0;
    double constant = 0.0;  // intercept of log s against log t
    double residual = 0.0;  // max |log s - fitted line|
    double t_min = 0.0;
    double t_max = 0.0;
    int samples = 0;
};

/// Least-squares line through (log t, log s) for samples inside the window.
/// Needs at least 8 samples and t_max / t_min >= 10.
DecayFit fit_decay(const DecaySeries& series, const FitWindow& window = {});

struct RatePrediction {
    bool convex = false;
    bool inconclusive = false;
    int order = 0;           // gamma (convex) or gamma0
    double exponent = 0.0;   // -(n-1)/gamma or -1/gamma0
    double regularity = 0.0; // n - (n-1)/gamma or n - 1/gamma0
    std::string branch;
};

RatePrediction predict_rate(const ContactReport& report, int n);

struct LpLqRate {
    double p = 0.0;
    double q = 0.0;  // infinity at p = 1
    double exponent = 0.0;
    double regularity = 0.0;
    bool endpoint = false;
};

/// Conjugate exponents pq = p + q. gamma = 2 gives the interpolated rate
/// -((n-1)/2)(1/p - 1/q) for p in [1, 2]; other gamma only the endpoints.
LpLqRate lp_lq_rate(double p, int n, int gamma = 2);

struct L2ConditionReport {
    double c0 = 1.0;            // min |det(I + t d_x d_xi phi)|
    bool violated = false;
    bool sign_change = false;   // determinant changes sign across the x grid
    double threshold = 0.0;
    double witness_t = 0.0;
    Vec witness_x;
    Vec witness_xi;
    /// "|alpha|,|beta|" -> sup |t^|alpha| d_x^alpha d_xi^beta phi| over the grids, 1 <= |alpha|, |beta| <= 2.
    std::map<std::string, double> bounds;
    std::string note;
};

/// Mixed derivatives by central differences on the given grids; xi over unit directions.
L2ConditionReport check_l2_conditions(const PhaseSpec& phase, const std::vector<double>& t_grid,
                                      const std::vector<Vec>& x_grid, const std::vector<Vec>& directions,
                                      double threshold = 1e-3);

/// Returns T_t u with the (2 pi)^-n normalisation (a unimodular multiplier is unitary).
using FieldOperator = std::function<GriddedField(const GriddedField& u, double t)>;

/// (2 pi)^-n fio_field: multiplier mode of the model operator family.
FieldOperator normalized_fio(const PhaseSpec& phase, const AmplitudeSpec& amplitude);

struct L2UniformityReport {
    std::vector<std::vector<double>> ratios;  // [function][time]
    double max_ratio = 0.0;
    double min_ratio = 0.0;
};

L2UniformityReport check_l2_uniformity(const FieldOperator& apply, const std::vector<GriddedField>& tests,
                                       const std::vector<double>& t_grid);

/// Band-limited test function with random spectral coefficients on |xi| <= band.
GriddedField random_band_limited(int n, double extent, int points, double band, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Sampling helpers

/// Points on `rays` equally spaced rays (n = 2) from 0 to radius, per_ray per ray.
std::vector<Vec> ray_points(double radius, int rays = 16, int per_ray = 400, double angle_offset = 0.0);

/// max of f over [r0, factor r0] sampled with the given step, refined by
/// golden-section search around the best sample.
double envelope_sup(const std::function<double(double)>& f, double r0, double factor = 1.25, double step = 0.1);

/// Log-spaced times from a to b (inclusive).
std::vector<double> log_space(double a, double b, int count);

}  // namespace fresnel
