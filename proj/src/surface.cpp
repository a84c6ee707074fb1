#include "fresnel/surface.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "fresnel/errors.hpp"
#include "fresnel/parallel.hpp"

namespace fresnel {

namespace {

Vec origin_if_empty(const Vec& x, int n) { return x.size() == 0 ? Vec(Vec::Zero(n)) : x; }

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

// Orthonormal basis of the complement of `normal`, as columns.
Mat tangent_frame(const Vec& normal) {
    const Eigen::Index n = normal.size();
    if (n == 2) {
        Mat f(2, 1);
        f << -normal[1], normal[0];
        return f;
    }
    const Mat column = normal;
    Eigen::HouseholderQR<Mat> qr(column);
    Mat q = qr.householderQ() * Mat::Identity(n, n);
    return q.rightCols(n - 1);
}

}  // namespace

Vec radial_solve(const PhaseSpec& phase, const Vec& theta, double t, const Vec& x) {
    const Vec xv = origin_if_empty(x, phase.dimension());
    const Vec dir = theta / theta.norm();
    const double v = eval_phase(phase, t, xv, dir);
    if (!(v > 0.0)) {
        std::ostringstream msg;
        msg << "phase is not positive along direction (" << dir.transpose() << ")";
        throw HypothesisViolation(msg.str());
    }
    return dir / v;
}

SurfacePatch::SurfacePatch(PhaseSpec phase, double t, Vec x, Vec base, double radius, int order)
    : phase_(std::move(phase)), t_(t), x_(std::move(x)), base_(std::move(base)), radius_(radius) {
    if (!(radius_ > 0.0)) throw UsageError("patch radius must be positive");
    if (order < 2) throw UsageError("patch order must be at least 2");
    const int n = phase_.dimension();
    if (n < 2) throw CapabilityError("surfaces need n >= 2");
    x_ = origin_if_empty(x_, n);
    const Vec grad = phase_gradient(phase_, t_, x_, base_);
    const double g = grad.norm();
    if (!(g > 0.0) || !std::isfinite(g)) throw DomainError("phase gradient vanishes at the patch base point");
    normal_ = grad / g;
    frame_ = tangent_frame(normal_);
    layout_ = JetLayout::get(n - 1, order);
    analytic_ = phase_.has_jets();
    if (analytic_)
        taylor_from_jets();
    else
        taylor_from_fit();
}

void SurfacePatch::taylor_from_jets() {
    const int n = phase_.dimension(), m = n - 1, order = layout_->order();
    std::vector<Jet> y;
    for (int k = 0; k < m; ++k) y.push_back(Jet::variable(layout_, k, 0.0));
    const double g0 = phase_gradient(phase_, t_, x_, base_).dot(normal_);
    Jet h(layout_, 0.0);
    std::vector<Jet> xi(static_cast<std::size_t>(n));
    // Each sweep fixes one more Taylor order of h.
    for (int sweep = 0; sweep <= order + 1; ++sweep) {
        for (int i = 0; i < n; ++i) {
            Jet c = normal_[i] * h;
            c += base_[i];
            for (int k = 0; k < m; ++k) c += frame_(i, k) * y[static_cast<std::size_t>(k)];
            xi[static_cast<std::size_t>(i)] = std::move(c);
        }
        Jet residual = phase_.jet(t_, x_, xi) - 1.0;
        h -= residual / g0;
    }
    taylor_.assign(h.coefficients().begin(), h.coefficients().end());
    taylor_[0] = 0.0;
    for (int k = 0; k < m; ++k) taylor_[layout_->unit_index(k)] = 0.0;
}

void SurfacePatch::taylor_from_fit() {
    // Least squares in the scaled variable y / delta over a tensor grid of
    // Chebyshev nodes; two extra degrees absorb truncation.
    const int m = tangent_dimension();
    const int fit_order = layout_->order() + 2;
    const double delta = radius_;
    auto fit_layout = JetLayout::get(m, fit_order);
    const int nodes = 2 * fit_order + 4;
    std::vector<double> cheb(static_cast<std::size_t>(nodes));
    for (int i = 0; i < nodes; ++i) cheb[static_cast<std::size_t>(i)] = std::cos(M_PI * (i + 0.5) / nodes);
    std::vector<Vec> samples;
    if (m == 1) {
        for (double c : cheb) samples.push_back(Vec::Constant(1, c));
    } else if (m == 2) {
        for (double a : cheb)
            for (double b : cheb) {
                Vec s(2);
                s << a, b;
                samples.push_back(s);
            }
    } else {
        throw CapabilityError("polynomial-fit patches support n <= 3");
    }
    Mat A(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(fit_layout->size()));
    Vec rhs(static_cast<Eigen::Index>(samples.size()));
    // height() uses the Taylor prediction as a starting guess; keep it zero while fitting.
    taylor_.assign(layout_->size(), 0.0);
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const Vec y = delta * samples[s];
        rhs[static_cast<Eigen::Index>(s)] = height(y);
        for (std::size_t a = 0; a < fit_layout->size(); ++a) {
            const auto alpha = fit_layout->exponents(a);
            double v = 1.0;
            for (int k = 0; k < m; ++k) v *= std::pow(samples[s][k], alpha[static_cast<std::size_t>(k)]);
            A(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) = v;
        }
    }
    const Vec coef = A.colPivHouseholderQr().solve(rhs);
    for (std::size_t a = 0; a < layout_->size(); ++a) {
        const auto alpha = layout_->exponents(a);
        const int deg = layout_->degree(a);
        taylor_[a] = deg < 2 ? 0.0 : coef[static_cast<Eigen::Index>(fit_layout->index(alpha))] / std::pow(delta, deg);
    }
}

Vec SurfacePatch::point(const Vec& y) const { return base_ + frame_ * y + height(y) * normal_; }

double SurfacePatch::height(const Vec& y) const {
    if (y.size() != tangent_dimension()) throw UsageError("tangent coordinate has the wrong dimension");
    // Taylor prediction as a starting point.
    double guess = 0.0;
    for (std::size_t a = 0; a < layout_->size(); ++a) {
        if (taylor_.empty() || taylor_[a] == 0.0) continue;
        const auto alpha = layout_->exponents(a);
        double v = taylor_[a];
        for (Eigen::Index k = 0; k < y.size(); ++k) v *= std::pow(y[k], alpha[static_cast<std::size_t>(k)]);
        guess += v;
    }
    if (!std::isfinite(guess) || std::abs(guess) > radius_) guess = 0.0;
    const Vec foot = base_ + frame_ * y;
    auto f = [&](double s) { return phase_(t_, x_, Vec(foot + s * normal_)) - 1.0; };
    const double scale = base_.norm();
    double w = std::max(1e-6 * scale, 1e-3 * std::abs(guess) + 1e-9 * scale);
    double lo = guess - w, hi = guess + w;
    double flo = f(lo), fhi = f(hi);
    const double limit = radius_ + std::abs(guess);
    while (flo * fhi > 0.0) {
        w *= 2.0;
        if (w > 2.0 * limit) {
            std::ostringstream msg;
            msg << "no surface crossing within the patch radius " << radius_ << " at |y| = " << y.norm();
            throw PatchRadiusError(msg.str());
        }
        lo = guess - w;
        hi = guess + w;
        flo = f(lo);
        fhi = f(hi);
    }
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    std::uintmax_t iterations = 200;
    auto root = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(52),
                                                  iterations);
    return 0.5 * (root.first + root.second);
}

Mat SurfacePatch::hessian() const {
    const int m = tangent_dimension();
    Mat H(m, m);
    std::vector<int> alpha(static_cast<std::size_t>(m), 0);
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) {
            std::fill(alpha.begin(), alpha.end(), 0);
            ++alpha[static_cast<std::size_t>(i)];
            ++alpha[static_cast<std::size_t>(j)];
            const double c = taylor_[layout_->index(alpha)];
            H(i, j) = H(j, i) = (i == j ? 2.0 : 1.0) * c;
        }
    return H;
}

std::vector<double> SurfacePatch::section_derivatives(const Vec& omega) const {
    const int K = layout_->order();
    std::vector<double> d(static_cast<std::size_t>(K) + 1, 0.0);
    for (std::size_t a = 0; a < layout_->size(); ++a) {
        const auto alpha = layout_->exponents(a);
        double v = taylor_[a];
        for (Eigen::Index k = 0; k < omega.size(); ++k) v *= std::pow(omega[k], alpha[static_cast<std::size_t>(k)]);
        d[static_cast<std::size_t>(layout_->degree(a))] += v;
    }
    for (int j = 0; j <= K; ++j) d[static_cast<std::size_t>(j)] *= factorial(j);
    return d;
}

SurfacePatch local_graph(const PhaseSpec& phase, const Vec& p, double delta, int order, double t, const Vec& x) {
    const Vec xv = origin_if_empty(x, phase.dimension());
    const double residual = std::abs(eval_phase(phase, t, xv, p) - 1.0);
    if (residual > 1e-9) {
        std::ostringstream msg;
        msg << "base point is off the surface (|phi - 1| = " << residual << ")";
        throw UsageError(msg.str());
    }
    return SurfacePatch(phase, t, xv, p, delta, order);
}

double contact_threshold(const SurfacePatch& patch, double tol) {
    return tol * std::max(1.0, 1.0 / patch.base().norm());
}

SectionContact section_contact(const SurfacePatch& patch, const Vec& omega, int gamma_max, double tol) {
    if (gamma_max < 2) throw UsageError("gamma_max must be at least 2");
    if (gamma_max > patch.order()) throw CapabilityError("patch order is below gamma_max");
    SectionContact s;
    s.omega = omega / omega.norm();
    const auto signed_d = patch.section_derivatives(s.omega);
    s.d.assign(static_cast<std::size_t>(gamma_max) + 1, 0.0);
    for (int j = 2; j <= gamma_max; ++j) s.d[static_cast<std::size_t>(j)] = std::abs(signed_d[static_cast<std::size_t>(j)]);
    const double thr = contact_threshold(patch, tol);
    s.exceeds = true;
    s.order = gamma_max + 1;
    for (int j = 2; j <= gamma_max; ++j)
        if (s.d[static_cast<std::size_t>(j)] >= thr) {
            s.order = j;
            s.leading = s.d[static_cast<std::size_t>(j)];
            s.exceeds = false;
            break;
        }
    return s;
}

namespace {

double partial_sum(const std::vector<double>& d, int upto) {
    double s = 0.0;
    for (int j = 2; j <= upto && j < static_cast<int>(d.size()); ++j) s += d[static_cast<std::size_t>(j)];
    return s;
}

}  // namespace

PointIndices point_indices(const SurfacePatch& patch, const std::vector<Vec>& omega_grid, int gamma_max, double tol,
                           int kappa_order, int kappa0_order) {
    if (omega_grid.empty()) throw UsageError("omega grid is empty");
    PointIndices r;
    r.gamma_sup = 0;
    r.gamma_inf = std::numeric_limits<int>::max();
    for (const Vec& w : omega_grid) {
        r.sections.push_back(section_contact(patch, w, gamma_max, tol));
        const auto& s = r.sections.back();
        r.exceeds = r.exceeds || s.exceeds;
        if (s.order > r.gamma_sup) {
            r.gamma_sup = s.order;
            r.worst_omega = s.omega;
        }
        r.gamma_inf = std::min(r.gamma_inf, s.order);
    }
    const int ko = std::min(kappa_order > 0 ? kappa_order : r.gamma_sup, gamma_max);
    const int k0 = std::min(kappa0_order > 0 ? kappa0_order : r.gamma_inf, gamma_max);
    r.kappa = std::numeric_limits<double>::infinity();
    r.kappa0 = 0.0;
    for (const auto& s : r.sections) {
        r.kappa = std::min(r.kappa, partial_sum(s.d, ko));
        r.kappa0 = std::max(r.kappa0, partial_sum(s.d, k0));
    }
    return r;
}

std::vector<Vec> omega_grid(int n, int count) {
    std::vector<Vec> out;
    if (n == 2) {
        out.push_back(Vec::Constant(1, 1.0));
    } else if (n == 3) {
        for (int k = 0; k < count; ++k) {
            const double a = 2.0 * M_PI * k / count;
            Vec w(2);
            w << std::cos(a), std::sin(a);
            out.push_back(w);
        }
    } else {
        throw CapabilityError("section direction grids are available for n = 2, 3");
    }
    return out;
}

Mat second_fundamental_form(const SurfacePatch& patch) { return -patch.hessian(); }

namespace {

double min_eigenvalue(const Mat& m) {
    if (m.rows() == 1) return m(0, 0);
    Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double default_resolution(int n, double requested) {
    if (requested > 0.0) return requested;
    return n == 2 ? 1.0 : 4.0;
}

struct Sample {
    Vec direction;
    Vec point;
    PointIndices indices;
    double min_curvature = 0.0;
};

Sample analyze_point(const PhaseSpec& phase, const Vec& direction, const SurfaceSampling& sampling,
                     const std::vector<Vec>& omegas, int gamma_max, double tol) {
    const Vec x = origin_if_empty(sampling.x, phase.dimension());
    Sample s;
    s.direction = direction;
    s.point = radial_solve(phase, direction, sampling.t, x);
    const SurfacePatch patch(phase, sampling.t, x, s.point, sampling.patch_radius * s.point.norm(), gamma_max);
    s.indices = point_indices(patch, omegas, gamma_max, tol);
    s.min_curvature = min_eigenvalue(second_fundamental_form(patch));
    return s;
}

double signed_curvature(const PhaseSpec& phase, double angle, const SurfaceSampling& sampling) {
    Vec th(2);
    th << std::cos(angle), std::sin(angle);
    const Vec x = origin_if_empty(sampling.x, 2);
    const Vec p = radial_solve(phase, th, sampling.t, x);
    const SurfacePatch patch(phase, sampling.t, x, p, sampling.patch_radius * p.norm(), 2);
    return second_fundamental_form(patch)(0, 0);
}

}  // namespace

ContactReport global_indices(const PhaseSpec& phase, const SurfaceSampling& sampling, int gamma_max, double tol) {
    const int n = phase.dimension();
    if (gamma_max < 2) throw UsageError("gamma_max must be at least 2");
    if (!(tol > 0.0)) throw UsageError("contact tolerance must be positive");
    const double res = default_resolution(n, sampling.resolution_deg);
    const auto directions = direction_grid(n, res);
    const auto omegas = omega_grid(n, sampling.omega_count);

    std::vector<Sample> samples(directions.size());
    parallel_for(directions.size(), [&](std::size_t i) {
        samples[i] = analyze_point(phase, directions[i], sampling, omegas, gamma_max, tol);
    });

    ContactReport rep;
    rep.dimension = n;
    rep.gamma_max = gamma_max;
    rep.tol = tol;
    rep.resolution_deg = res;
    rep.direction_count = omegas.size();

    if (n == 2) {
        std::vector<Sample> extra;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const std::size_t j = (i + 1) % samples.size();
            const double a = samples[i].min_curvature, b = samples[j].min_curvature;
            if (!((a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0))) continue;
            ++rep.curvature_sign_changes;
            if (!sampling.refine_inflections) continue;
            double lo = std::atan2(directions[i][1], directions[i][0]);
            double hi = std::atan2(directions[j][1], directions[j][0]);
            if (hi < lo) hi += 2.0 * M_PI;
            double flo = a;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = signed_curvature(phase, mid, sampling);
                if ((fm < 0.0) == (flo < 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            const double root = 0.5 * (lo + hi);
            Vec th(2);
            th << std::cos(root), std::sin(root);
            extra.push_back(analyze_point(phase, th, sampling, omegas, gamma_max, tol));
        }
        for (auto& e : extra) samples.push_back(std::move(e));
    }
    rep.point_count = samples.size();

    rep.gamma = 0;
    rep.gamma0 = 0;
    for (const auto& s : samples) {
        rep.gamma = std::max(rep.gamma, s.indices.gamma_sup);
        rep.gamma0 = std::max(rep.gamma0, s.indices.gamma_inf);
        rep.inconclusive = rep.inconclusive || s.indices.exceeds;
    }
    const int ko = std::min(rep.gamma, gamma_max), k0 = std::min(rep.gamma0, gamma_max);
    rep.kappa = std::numeric_limits<double>::infinity();
    rep.kappa0 = std::numeric_limits<double>::infinity();
    rep.min_curvature = std::numeric_limits<double>::infinity();
    std::size_t kappa_arg = 0, curv_arg = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        double kp = std::numeric_limits<double>::infinity(), k0p = 0.0;
        for (const auto& sec : s.indices.sections) {
            kp = std::min(kp, partial_sum(sec.d, ko));
            k0p = std::max(k0p, partial_sum(sec.d, k0));
        }
        if (kp < rep.kappa) {
            rep.kappa = kp;
            kappa_arg = i;
        }
        rep.kappa0 = std::min(rep.kappa0, k0p);
        if (s.min_curvature < rep.min_curvature) {
            rep.min_curvature = s.min_curvature;
            curv_arg = i;
        }
        PointRecord rec;
        rec.direction = s.direction;
        rec.point = s.point;
        rec.gamma_sup = s.indices.gamma_sup;
        rec.gamma_inf = s.indices.gamma_inf;
        rec.kappa = kp;
        rec.kappa0 = k0p;
        rec.min_curvature = s.min_curvature;
        rec.exceeds = s.indices.exceeds;
        rep.points.push_back(std::move(rec));
    }
    rep.convex = rep.min_curvature >= -1e-9;

    constexpr std::size_t max_worst = 32;
    for (const auto& s : samples) {
        if (rep.worst.size() >= max_worst) break;
        if (s.indices.gamma_sup == rep.gamma)
            rep.worst.push_back({s.point, s.indices.worst_omega, s.indices.gamma_sup, "max-order"});
    }
    rep.worst.push_back({samples[kappa_arg].point, samples[kappa_arg].indices.worst_omega,
                         samples[kappa_arg].indices.gamma_sup, "min-kappa"});
    rep.worst.push_back({samples[curv_arg].point, samples[curv_arg].indices.worst_omega,
                         samples[curv_arg].indices.gamma_sup, "min-curvature"});
    return rep;
}

ConvexityReport convexity_check(const PhaseSpec& phase, const SurfaceSampling& sampling) {
    const int n = phase.dimension();
    const auto directions = direction_grid(n, default_resolution(n, sampling.resolution_deg));
    const Vec x = origin_if_empty(sampling.x, n);
    std::vector<double> curv(directions.size());
    parallel_for(directions.size(), [&](std::size_t i) {
        const Vec p = radial_solve(phase, directions[i], sampling.t, x);
        const SurfacePatch patch(phase, sampling.t, x, p, sampling.patch_radius * p.norm(), 2);
        curv[i] = min_eigenvalue(second_fundamental_form(patch));
    });
    ConvexityReport r;
    const auto it = std::min_element(curv.begin(), curv.end());
    r.min_curvature = *it;
    r.argmin = directions[static_cast<std::size_t>(it - curv.begin())];
    r.convex = r.min_curvature >= -1e-9;
    return r;
}

}  // namespace fresnel
