#pragma once

// Oscillatory integrals: Fourier transforms of surface-carried densities,
// the model operator T and the family T_t, Besov norms of gridded data and a
// one-dimensional van der Corput table.
//
// Fourier convention: u_hat(xi) = int e^{-i x.xi} u(x) dx and
// T_t u(x) = int e^{i(x.xi + t phi)} a u_hat(xi) dxi with no (2 pi)^-n factor,
// so T_t with a = 1 and phi = 0 returns (2 pi)^n u.

#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "fresnel/phase.hpp"

namespace fresnel {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// Surface-carried densities

struct SurfaceDensity {
    PhaseSpec phase;
    double t = 0.0;
    Vec x;  // phase parameter; empty means the origin
    /// Density as a function of the unit direction theta (radial pullback); empty means 1.
    std::function<double(const Vec& theta)> density;
};

/// Quadrature nodes on the surface: points q and weights including the
/// surface Jacobian |grad phi(theta)| phi(theta)^-n and the density.
struct SurfaceNodes {
    std::vector<double> coords;  // n entries per node
    std::vector<double> weights;
    int panels = 0;
};

/// Fourier transform of a surface density with cached node sets. Panel counts
/// are doubled until two estimates agree to the absolute target.
class SurfaceTransform {
public:
    explicit SurfaceTransform(SurfaceDensity density, double abs_tol = 1e-8);

    int dimension() const { return n_; }
    double diameter() const { return diameter_; }
    /// Total measure int_Sigma f.
    double total_measure();

    cplx operator()(const Vec& x);
    /// Evaluates many points with one panel count chosen (and verified) for the largest |x|.
    std::vector<cplx> evaluate(const std::vector<Vec>& xs);

    const SurfaceNodes& nodes(int panels);
    int panels_for(double radius) const;

private:
    SurfaceDensity density_;
    double abs_tol_;
    int n_;
    double diameter_ = 0.0;
    std::mutex mutex_;
    std::map<int, std::unique_ptr<SurfaceNodes>> cache_;

    cplx sum(const SurfaceNodes& nodes, const Vec& x) const;
    int converged_panels(const Vec& x);
};

/// One-shot helper (no cache reuse across calls).
cplx surface_ft(const SurfaceDensity& density, const Vec& x, double abs_tol = 1e-8);

// ---------------------------------------------------------------------------
// Gridded fields

/// Field sampled on x_j = -L/2 + j * L / N per axis, N a power of two;
/// values in row-major order (last axis fastest).
class GriddedField {
public:
    GriddedField() = default;
    GriddedField(int n, double extent, int points);

    int dimension() const { return n_; }
    double extent() const { return extent_; }
    int points() const { return points_; }
    double spacing() const { return extent_ / points_; }
    double frequency_spacing() const { return 2.0 * M_PI / extent_; }
    double nyquist() const { return M_PI / spacing(); }
    std::size_t size() const { return values_.size(); }

    std::vector<cplx>& values() { return values_; }
    const std::vector<cplx>& values() const { return values_; }
    cplx& operator[](std::size_t i) { return values_[i]; }
    const cplx& operator[](std::size_t i) const { return values_[i]; }

    Vec position(std::size_t index) const;
    /// Frequency of the DFT bin at `index` in FFT order (k and k - N aliases folded to [-N/2, N/2)).
    Vec frequency(std::size_t index) const;

    /// Discrete L2 norm (sum |u|^2 dx^n)^(1/2).
    double l2_norm() const;
    double sup_norm() const;

    /// Field whose discrete transform equals `uhat` at the grid frequencies.
    static GriddedField from_spectrum(int n, double extent, int points, const std::function<cplx(const Vec&)>& uhat);
    static GriddedField from_function(int n, double extent, int points, const std::function<cplx(const Vec&)>& u);

private:
    int n_ = 0;
    double extent_ = 0.0;
    int points_ = 0;
    std::vector<cplx> values_;
};

/// Samples of u_hat(xi_k) = sum_j u(x_j) e^{-i x_j . xi_k} dx^n in FFT order.
std::vector<cplx> forward_transform(const GriddedField& u);
/// Inverse of forward_transform: the gridded field with these spectral samples.
GriddedField inverse_transform(const std::vector<cplx>& spectrum, int n, double extent, int points);

// ---------------------------------------------------------------------------
// Fourier integral operators

using Spectrum = std::function<cplx(const Vec& xi)>;

struct FrequencyBox {
    double radius_min = 0.0;
    double radius_max = 0.0;  // polar box in n = 2, 3; must contain the effective support
};

struct ModelFioResult {
    cplx value;
    double tail_bound = 0.0;  // |u_hat| on the outer boundary times the boundary measure
    bool truncated = false;
    int panels = 0;
};

/// int e^{i(x.xi + t phi(t, x, xi))} a(t, x, xi) u_hat(xi) dxi by polar panel
/// quadrature (n = 1, 2, 3), refined until the relative change is below rel_tol.
ModelFioResult model_fio(const PhaseSpec& phase, const AmplitudeSpec& amplitude, const Spectrum& uhat,
                         const FrequencyBox& box, const Vec& x, double t = 1.0, double rel_tol = 1e-7);

enum class FioMode { Multiplier, Direct };

/// T_t u at arbitrary evaluation points by summation over the grid frequencies.
/// The sum is periodic in x with period L per axis.
std::vector<cplx> fio_apply(const PhaseSpec& phase, const AmplitudeSpec& amplitude, const GriddedField& u, double t,
                            const std::vector<Vec>& eval_points, FioMode* mode_used = nullptr);

/// T_t u on the grid itself by an inverse FFT (multiplier mode only).
GriddedField fio_field(const PhaseSpec& phase, const AmplitudeSpec& amplitude, const GriddedField& u, double t);

/// Radial data u_hat(xi) = psi(|xi|) with psi(s) = exp(-(s - c)^2 / (2 sigma^2)).
struct AnnulusProfile {
    double center = 1.5;
    double width = 0.25;
    double operator()(double s) const { return std::exp(-0.5 * (s - center) * (s - center) / (width * width)); }
    double inner() const { return std::max(0.0, center - 9.0 * width); }
    double outer() const { return center + 9.0 * width; }
};

/// Psi(lambda) = int_R e^{i s lambda} psi(s) s^(n-1) ds in closed form (n = 1, 2, 3).
cplx annulus_radial_transform(const AnnulusProfile& profile, int n, double lambda);

/// T_t u(x) for annulus data and an x-independent phase through the polar
/// reduction int_{S^{n-1}} a Psi(x.theta + t phi(theta)) dtheta (n = 2, 3).
/// The amplitude must be constant on the support of the profile.
class RadialFio {
public:
    RadialFio(PhaseSpec phase, AmplitudeSpec amplitude, AnnulusProfile profile, double rel_tol = 1e-8);

    cplx operator()(double t, const Vec& x);
    /// min / max of |grad phi| over directions: the wavefront lies in t * [min, max].
    double speed_min() const { return speed_min_; }
    double speed_max() const { return speed_max_; }

private:
    struct Nodes {
        std::vector<double> theta;  // n entries per node
        std::vector<double> phi;
        std::vector<double> weights;
    };
    PhaseSpec phase_;
    AmplitudeSpec amplitude_;
    AnnulusProfile profile_;
    double rel_tol_;
    int n_;
    double speed_min_ = 0.0, speed_max_ = 0.0;
    std::mutex mutex_;
    std::map<int, std::unique_ptr<Nodes>> cache_;
    const Nodes& nodes(int panels);
    cplx sum(const Nodes& nodes, double t, const Vec& x) const;
};

// ---------------------------------------------------------------------------
// Besov norms

struct BesovSpec {
    double r = 0.0;
    int blocks = 0;  // J; 0 selects the smallest J with 2^J above the largest grid frequency
};

/// Smooth dyadic profile: 1 on [0, 1], cos^2 transition on [1, 2], 0 beyond.
double dyadic_profile(double s);
/// Multiplier of block j at |xi|: profile(|xi|) for j = 0, profile(|xi|/2^j) - profile(|xi|/2^(j-1)) otherwise.
double dyadic_block(int j, double radius);

struct BesovReport {
    double norm = 0.0;
    int blocks = 0;
    std::vector<double> block_l1;  // ||Delta_j u||_L1
};

BesovReport besov_norm(const GriddedField& u, const BesovSpec& spec);

// ---------------------------------------------------------------------------
// van der Corput

struct VdcRow {
    double lambda = 0.0;
    double magnitude = 0.0;
    double ratio = 0.0;  // magnitude * lambda^(1/k)
    cplx value;
};

/// |int_a^b e^{i lambda s^k} amp(s) ds| over the lambda grid; `support` is [a, b].
std::vector<VdcRow> van_der_corput_1d(int k, const std::function<double(double)>& amplitude,
                                      std::pair<double, double> support, const std::vector<double>& lambdas,
                                      double abs_tol = 1e-10);

/// C-infinity bump equal to 1 on [-inner, inner] and 0 outside [-outer, outer].
double plateau_bump(double s, double inner = 0.5, double outer = 1.0);

}  // namespace fresnel
