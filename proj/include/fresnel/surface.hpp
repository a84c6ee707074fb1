#pragma once

// Fresnel surfaces {phi(t, x, .) = 1}: radial sampling, local graphs over
// tangent planes, contact orders of planar sections and the global indices.

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <vector>

#include "fresnel/jet.hpp"
#include "fresnel/phase.hpp"

namespace fresnel {

using Mat = Eigen::MatrixXd;

/// r * theta with r = 1 / phi(theta).
Vec radial_solve(const PhaseSpec& phase, const Vec& theta, double t = 0.0, const Vec& x = Vec());

/// Local graph of the surface over the tangent plane at a base point:
/// base + frame * y + h(y) * normal. The Taylor coefficients of h up to the
/// requested order come from jets when the phase provides them and from a
/// least-squares polynomial fit to root-found heights otherwise.
class SurfacePatch {
public:
    SurfacePatch(PhaseSpec phase, double t, Vec x, Vec base, double radius, int order);

    const Vec& base() const { return base_; }
    const Vec& normal() const { return normal_; }
    /// n x (n-1), orthonormal columns spanning the tangent plane.
    const Mat& frame() const { return frame_; }
    double radius() const { return radius_; }
    int order() const { return layout_->order(); }
    int tangent_dimension() const { return static_cast<int>(frame_.cols()); }
    bool analytic() const { return analytic_; }

    /// Height along the normal; 1D root finding on phi = 1.
    double height(const Vec& y) const;
    Vec point(const Vec& y) const;

    /// Taylor coefficients c_alpha of h at y = 0 over the (n-1)-variable layout.
    const std::shared_ptr<const JetLayout>& layout() const { return layout_; }
    const std::vector<double>& taylor() const { return taylor_; }
    /// Hessian of h at 0.
    Mat hessian() const;
    /// Signed derivatives d^j/drho^j h(rho * omega) at 0, j = 0..order.
    std::vector<double> section_derivatives(const Vec& omega) const;

private:
    PhaseSpec phase_;
    double t_;
    Vec x_;
    Vec base_;
    Vec normal_;
    Mat frame_;
    double radius_;
    bool analytic_ = true;
    std::shared_ptr<const JetLayout> layout_;
    std::vector<double> taylor_;

    void taylor_from_jets();
    void taylor_from_fit();
};

/// Builds the patch after checking that p lies on the surface (1e-9).
SurfacePatch local_graph(const PhaseSpec& phase, const Vec& p, double delta, int order = 8, double t = 0.0,
                         const Vec& x = Vec());

struct SectionContact {
    Vec omega;
    int order = 0;          // contact order, or gamma_max + 1 when exceeded
    bool exceeds = false;   // no derivative above tolerance up to gamma_max
    double leading = 0.0;   // |d^order h|, zero when exceeded
    std::vector<double> d;  // d[j] = |d^j h|, j = 0..gamma_max (entries 0, 1 unused)
};

/// Zero threshold for section derivatives at a base point.
double contact_threshold(const SurfacePatch& patch, double tol);

SectionContact section_contact(const SurfacePatch& patch, const Vec& omega, int gamma_max, double tol = 1e-5);

struct PointIndices {
    int gamma_sup = 0;
    int gamma_inf = 0;
    bool exceeds = false;
    double kappa = 0.0;   // min over omega of sum_{j=2}^{kappa_order} d_j
    double kappa0 = 0.0;  // max over omega of sum_{j=2}^{kappa0_order} d_j
    Vec worst_omega;
    std::vector<SectionContact> sections;
};

/// Sums of derivative sequences are taken up to the given orders; zero means
/// the point's own gamma_sup / gamma_inf.
PointIndices point_indices(const SurfacePatch& patch, const std::vector<Vec>& omega_grid, int gamma_max,
                           double tol = 1e-5, int kappa_order = 0, int kappa0_order = 0);

/// Tangent-plane directions: {+1} for n = 2, `count` equally spaced angles for n = 3.
std::vector<Vec> omega_grid(int n, int count = 72);

struct SurfaceSampling {
    double resolution_deg = 0.0;  // 0 selects 1 degree in n = 2 and 4 degrees in n = 3
    double t = 0.0;
    Vec x;                        // empty means the origin
    int omega_count = 72;
    double patch_radius = 0.25;   // relative to |p|
    bool refine_inflections = false;  // n = 2: add points where the curvature changes sign
};

struct WorstPoint {
    Vec point;
    Vec omega;
    int order = 0;
    std::string reason;
};

struct PointRecord {
    Vec direction;
    Vec point;
    int gamma_sup = 0;
    int gamma_inf = 0;
    double kappa = 0.0;
    double kappa0 = 0.0;
    double min_curvature = 0.0;
    bool exceeds = false;
};

struct ContactReport {
    int gamma = 0;
    int gamma0 = 0;
    double kappa = 0.0;
    double kappa0 = 0.0;
    bool convex = false;
    double min_curvature = 0.0;
    bool inconclusive = false;
    int dimension = 0;
    int gamma_max = 0;
    double tol = 0.0;
    double resolution_deg = 0.0;
    std::size_t point_count = 0;
    std::size_t direction_count = 0;
    int curvature_sign_changes = 0;  // n = 2 only
    std::vector<WorstPoint> worst;
    std::vector<PointRecord> points;
};

ContactReport global_indices(const PhaseSpec& phase, const SurfaceSampling& sampling = {}, int gamma_max = 8,
                             double tol = 1e-5);

struct ConvexityReport {
    bool convex = true;
    double min_curvature = 0.0;  // smallest eigenvalue of the second fundamental form
    Vec argmin;
};

ConvexityReport convexity_check(const PhaseSpec& phase, const SurfaceSampling& sampling = {});

/// Second fundamental form -Hess h at the patch base point (outward normal).
Mat second_fundamental_form(const SurfacePatch& patch);

}  // namespace fresnel
