#include "fresnel/oscint.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fresnel/errors.hpp"
#include "fresnel/parallel.hpp"
#include "fresnel/quadrature.hpp"

namespace fresnel {

namespace {

constexpr int kGauss = 16;

int next_pow2(double v) {
    int p = 1;
    while (p < v) p *= 2;
    return p;
}

Vec zeros_if_empty(const Vec& x, int n) { return x.size() == 0 ? Vec(Vec::Zero(n)) : x; }

// Unit direction from angles: n = 2 uses a, n = 3 uses polar a and azimuth b.
Vec unit_direction(int n, double a, double b = 0.0) {
    Vec v(n);
    if (n == 2) {
        v << std::cos(a), std::sin(a);
    } else {
        v << std::sin(a) * std::cos(b), std::sin(a) * std::sin(b), std::cos(a);
    }
    return v;
}

// Panel-GL nodes over [lo, hi].
void panel_nodes(double lo, double hi, int panels, std::vector<double>& x, std::vector<double>& w) {
    const GaussRule& rule = gauss_legendre(kGauss);
    const double h = (hi - lo) / panels;
    x.clear();
    w.clear();
    x.reserve(static_cast<std::size_t>(panels * kGauss));
    w.reserve(static_cast<std::size_t>(panels * kGauss));
    for (int p = 0; p < panels; ++p) {
        const double mid = lo + (p + 0.5) * h;
        for (int i = 0; i < kGauss; ++i) {
            x.push_back(mid + 0.5 * h * rule.nodes[static_cast<std::size_t>(i)]);
            w.push_back(0.5 * h * rule.weights[static_cast<std::size_t>(i)]);
        }
    }
}

std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

// In-place n-dimensional complex DFT; sign = FFTW_FORWARD or FFTW_BACKWARD.
void fft_inplace(std::vector<cplx>& data, int n, int points, int sign) {
    std::vector<int> dims(static_cast<std::size_t>(n), points);
    fftw_plan plan;
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    {
        std::lock_guard lock(fftw_mutex());
        plan = fftw_plan_dft(n, dims.data(), ptr, ptr, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    if (!plan) throw CapabilityError("FFTW could not create a plan");
    fftw_execute(plan);
    std::lock_guard lock(fftw_mutex());
    fftw_destroy_plan(plan);
}

// Per-axis integer frequency index in [-N/2, N/2).
void frequency_indices(std::size_t index, int n, int points, std::vector<int>& k) {
    k.resize(static_cast<std::size_t>(n));
    for (int d = n - 1; d >= 0; --d) {
        const int j = static_cast<int>(index % static_cast<std::size_t>(points));
        index /= static_cast<std::size_t>(points);
        k[static_cast<std::size_t>(d)] = j < points / 2 ? j : j - points;
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// SurfaceTransform

SurfaceTransform::SurfaceTransform(SurfaceDensity density, double abs_tol)
    : density_(std::move(density)), abs_tol_(abs_tol), n_(density_.phase.dimension()) {
    if (n_ != 2 && n_ != 3) throw CapabilityError("surface transforms are implemented for n = 2, 3");
    density_.x = zeros_if_empty(density_.x, n_);
    double rmax = 0.0;
    for (const Vec& th : direction_grid(n_, n_ == 2 ? 1.0 : 4.0)) {
        const double v = eval_phase(density_.phase, density_.t, density_.x, th);
        if (!(v > 0.0)) throw HypothesisViolation("phase is not positive on the direction sphere");
        rmax = std::max(rmax, 1.0 / v);
    }
    diameter_ = 2.0 * rmax;
}

int SurfaceTransform::panels_for(double radius) const {
    // Phase x.q changes by about |x| * diam / 2 per radian of angle. Start near
    // 4 pi per 16-point panel; the doubling check returns the finer estimate.
    const double rate = radius * diameter_;
    return next_pow2(8.0 + rate / 4.0);
}

const SurfaceNodes& SurfaceTransform::nodes(int panels) {
    {
        std::lock_guard lock(mutex_);
        auto it = cache_.find(panels);
        if (it != cache_.end()) return *it->second;
    }
    auto nodes = std::make_unique<SurfaceNodes>();
    nodes->panels = panels;
    const PhaseSpec& phase = density_.phase;
    auto add = [&](const Vec& th, double w) {
        const double phi = phase(density_.t, density_.x, th);
        const double grad = phase_gradient(phase, density_.t, density_.x, th).norm();
        const double f = density_.density ? density_.density(th) : 1.0;
        for (int d = 0; d < n_; ++d) nodes->coords.push_back(th[d] / phi);
        nodes->weights.push_back(w * grad * std::pow(phi, -n_) * f);
    };
    std::vector<double> a, wa, b, wb;
    if (n_ == 2) {
        panel_nodes(0.0, 2.0 * M_PI, panels, a, wa);
        for (std::size_t i = 0; i < a.size(); ++i) add(unit_direction(2, a[i]), wa[i]);
    } else {
        panel_nodes(0.0, M_PI, panels, a, wa);
        panel_nodes(0.0, 2.0 * M_PI, 2 * panels, b, wb);
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j)
                add(unit_direction(3, a[i], b[j]), wa[i] * wb[j] * std::sin(a[i]));
    }
    std::lock_guard lock(mutex_);
    auto& slot = cache_[panels];
    if (!slot) slot = std::move(nodes);
    return *slot;
}

cplx SurfaceTransform::sum(const SurfaceNodes& nodes, const Vec& x) const {
    double re = 0.0, im = 0.0;
    const std::size_t count = nodes.weights.size();
    const double* q = nodes.coords.data();
    for (std::size_t i = 0; i < count; ++i, q += n_) {
        double arg = 0.0;
        for (int d = 0; d < n_; ++d) arg += x[d] * q[d];
        re += nodes.weights[i] * std::cos(arg);
        im += nodes.weights[i] * std::sin(arg);
    }
    return {re, im};
}

int SurfaceTransform::converged_panels(const Vec& x) {
    int panels = panels_for(x.norm());
    const int limit = n_ == 2 ? (1 << 17) : (1 << 11);
    cplx coarse = sum(nodes(panels), x);
    while (panels <= limit) {
        const cplx fine = sum(nodes(2 * panels), x);
        if (std::abs(fine - coarse) <= abs_tol_) return 2 * panels;
        panels *= 2;
        coarse = fine;
    }
    throw AccuracyError("surface transform did not stabilise under panel doubling", std::abs(coarse), std::abs(coarse));
}

std::vector<cplx> SurfaceTransform::evaluate(const std::vector<Vec>& xs) {
    if (xs.empty()) return {};
    std::size_t far = 0;
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (xs[i].norm() > xs[far].norm()) far = i;
    for (const Vec& x : xs)
        if (x.size() != n_) throw UsageError("evaluation point has the wrong dimension");
    const SurfaceNodes& set = nodes(converged_panels(xs[far]));
    std::vector<cplx> out(xs.size());
    parallel_for(xs.size(), [&](std::size_t i) { out[i] = sum(set, xs[i]); });
    return out;
}

cplx SurfaceTransform::operator()(const Vec& x) { return evaluate({x}).front(); }

double SurfaceTransform::total_measure() { return (*this)(Vec::Zero(n_)).real(); }

cplx surface_ft(const SurfaceDensity& density, const Vec& x, double abs_tol) {
    SurfaceTransform tr(density, abs_tol);
    return tr(x);
}

// ---------------------------------------------------------------------------
// GriddedField

GriddedField::GriddedField(int n, double extent, int points) : n_(n), extent_(extent), points_(points) {
    if (n < 1 || n > 3) throw CapabilityError("gridded fields support n = 1, 2, 3");
    if (points < 2 || (points & (points - 1)) != 0) throw UsageError("grid size must be a power of two");
    if (!(extent > 0.0)) throw UsageError("grid extent must be positive");
    std::size_t total = 1;
    for (int d = 0; d < n; ++d) total *= static_cast<std::size_t>(points);
    values_.assign(total, cplx(0.0, 0.0));
}

Vec GriddedField::position(std::size_t index) const {
    Vec x(n_);
    for (int d = n_ - 1; d >= 0; --d) {
        const auto j = static_cast<double>(index % static_cast<std::size_t>(points_));
        index /= static_cast<std::size_t>(points_);
        x[d] = -0.5 * extent_ + j * spacing();
    }
    return x;
}

Vec GriddedField::frequency(std::size_t index) const {
    std::vector<int> k;
    frequency_indices(index, n_, points_, k);
    Vec xi(n_);
    for (int d = 0; d < n_; ++d) xi[d] = k[static_cast<std::size_t>(d)] * frequency_spacing();
    return xi;
}

double GriddedField::l2_norm() const {
    double s = 0.0;
    for (const cplx& v : values_) s += std::norm(v);
    return std::sqrt(s * std::pow(spacing(), n_));
}

double GriddedField::sup_norm() const {
    double s = 0.0;
    for (const cplx& v : values_) s = std::max(s, std::abs(v));
    return s;
}

std::vector<cplx> forward_transform(const GriddedField& u) {
    std::vector<cplx> data = u.values();
    fft_inplace(data, u.dimension(), u.points(), FFTW_FORWARD);
    const double scale = std::pow(u.spacing(), u.dimension());
    std::vector<int> k;
    for (std::size_t i = 0; i < data.size(); ++i) {
        frequency_indices(i, u.dimension(), u.points(), k);
        int parity = 0;
        for (int v : k) parity += v;
        data[i] *= (parity % 2 == 0 ? scale : -scale);
    }
    return data;
}

GriddedField inverse_transform(const std::vector<cplx>& spectrum, int n, double extent, int points) {
    GriddedField u(n, extent, points);
    if (spectrum.size() != u.size()) throw UsageError("spectrum size does not match the grid");
    std::vector<cplx>& data = u.values();
    data = spectrum;
    std::vector<int> k;
    for (std::size_t i = 0; i < data.size(); ++i) {
        frequency_indices(i, n, points, k);
        int parity = 0;
        for (int v : k) parity += v;
        if (parity % 2 != 0) data[i] = -data[i];
    }
    fft_inplace(data, n, points, FFTW_BACKWARD);
    const double scale = std::pow(extent, -n);
    for (cplx& v : data) v *= scale;
    return u;
}

GriddedField GriddedField::from_spectrum(int n, double extent, int points,
                                         const std::function<cplx(const Vec&)>& uhat) {
    GriddedField probe(n, extent, points);
    std::vector<cplx> spec(probe.size());
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] = uhat(probe.frequency(i));
    return inverse_transform(spec, n, extent, points);
}

GriddedField GriddedField::from_function(int n, double extent, int points,
                                         const std::function<cplx(const Vec&)>& u) {
    GriddedField f(n, extent, points);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = u(f.position(i));
    return f;
}

// ---------------------------------------------------------------------------
// Fourier integral operators

namespace {

double max_gradient(const PhaseSpec& phase, double t, const Vec& x) {
    const int n = phase.dimension();
    double g = 0.0;
    if (n == 1) {
        for (double s : {-1.0, 1.0}) g = std::max(g, std::abs(phase_gradient(phase, t, x, Vec::Constant(1, s))[0]));
        return g;
    }
    for (const Vec& th : direction_grid(n, n == 2 ? 2.0 : 6.0)) g = std::max(g, phase_gradient(phase, t, x, th).norm());
    return g;
}

struct PolarRule {
    std::vector<double> coords;  // n per node
    std::vector<double> weights;
};

PolarRule polar_rule(int n, double rmin, double rmax, int radial_panels, int angular_panels) {
    PolarRule rule;
    std::vector<double> s, ws, a, wa, b, wb;
    if (n == 1) {
        panel_nodes(rmin, rmax, radial_panels, s, ws);
        for (double sign : {-1.0, 1.0})
            for (std::size_t i = 0; i < s.size(); ++i) {
                rule.coords.push_back(sign * s[i]);
                rule.weights.push_back(ws[i]);
            }
        return rule;
    }
    panel_nodes(rmin, rmax, radial_panels, s, ws);
    if (n == 2) {
        panel_nodes(0.0, 2.0 * M_PI, angular_panels, a, wa);
        for (std::size_t i = 0; i < s.size(); ++i)
            for (std::size_t j = 0; j < a.size(); ++j) {
                rule.coords.push_back(s[i] * std::cos(a[j]));
                rule.coords.push_back(s[i] * std::sin(a[j]));
                rule.weights.push_back(ws[i] * wa[j] * s[i]);
            }
        return rule;
    }
    panel_nodes(0.0, M_PI, angular_panels, a, wa);
    panel_nodes(0.0, 2.0 * M_PI, 2 * angular_panels, b, wb);
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < a.size(); ++j)
            for (std::size_t k = 0; k < b.size(); ++k) {
                const Vec th = unit_direction(3, a[j], b[k]);
                for (int d = 0; d < 3; ++d) rule.coords.push_back(s[i] * th[d]);
                rule.weights.push_back(ws[i] * wa[j] * wb[k] * s[i] * s[i] * std::sin(a[j]));
            }
    return rule;
}

}  // namespace

ModelFioResult model_fio(const PhaseSpec& phase, const AmplitudeSpec& amplitude, const Spectrum& uhat,
                         const FrequencyBox& box, const Vec& x, double t, double rel_tol) {
    const int n = phase.dimension();
    if (n < 1 || n > 3) throw CapabilityError("model_fio supports n = 1, 2, 3");
    if (!(box.radius_max > box.radius_min) || box.radius_min < 0.0) throw UsageError("invalid frequency box");
    if (x.size() != n) throw UsageError("evaluation point has the wrong dimension");
    const double R = box.radius_max;
    const double rate = x.norm() + std::abs(t) * max_gradient(phase, t, x);
    int radial = next_pow2(4.0 + (R - box.radius_min) * rate / M_PI);
    int angular = next_pow2(8.0 + 2.0 * R * rate / M_PI);

    auto integrate = [&](int rp, int ap, double* scale) {
        const PolarRule rule = polar_rule(n, box.radius_min, R, rp, ap);
        const std::size_t count = rule.weights.size();
        std::vector<cplx> parts(count);
        std::vector<double> mags(count);
        parallel_for(count, [&](std::size_t i) {
            Vec xi(n);
            for (int d = 0; d < n; ++d) xi[d] = rule.coords[i * static_cast<std::size_t>(n) + static_cast<std::size_t>(d)];
            const cplx u = uhat(xi);
            if (u == cplx(0.0, 0.0) || xi.squaredNorm() == 0.0) return;
            const double a = amplitude(t, x, xi);
            const double arg = x.dot(xi) + t * phase(t, x, xi);
            parts[i] = rule.weights[i] * a * u * cplx(std::cos(arg), std::sin(arg));
            mags[i] = std::abs(rule.weights[i] * a * u);
        });
        cplx total(0.0, 0.0);
        double s = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            total += parts[i];
            s += mags[i];
        }
        *scale = s;
        return total;
    };

    double scale = 0.0;
    cplx coarse = integrate(radial, angular, &scale);
    ModelFioResult result;
    const double max_nodes = 4e7;
    for (;;) {
        const double next_nodes = std::pow(2.0, n) * (radial * kGauss) * std::pow(angular * kGauss, n - 1) *
                                  (n == 3 ? 2.0 : 1.0);
        if (next_nodes > max_nodes)
            throw AccuracyError("model_fio quadrature did not stabilise", std::abs(coarse), std::abs(coarse));
        radial *= 2;
        angular *= 2;
        double fine_scale = 0.0;
        const cplx fine = integrate(radial, angular, &fine_scale);
        scale = fine_scale;
        if (std::abs(fine - coarse) <= rel_tol * std::max(scale, std::numeric_limits<double>::min())) {
            result.value = fine;
            break;
        }
        coarse = fine;
    }
    result.panels = radial;
    // Tail indicator: |u_hat| on the outer sphere times its measure.
    double edge = 0.0;
    if (n == 1) {
        edge = std::max(std::abs(uhat(Vec::Constant(1, R))), std::abs(uhat(Vec::Constant(1, -R))));
        result.tail_bound = 2.0 * edge;
    } else {
        for (const Vec& th : direction_grid(n, n == 2 ? 5.0 : 15.0))
            edge = std::max(edge, std::abs(uhat(Vec(R * th))));
        result.tail_bound = edge * (n == 2 ? 2.0 * M_PI * R : 4.0 * M_PI * R * R);
    }
    result.truncated = result.tail_bound > rel_tol * std::max(scale, std::numeric_limits<double>::min());
    return result;
}

namespace {

struct ActiveFrequency {
    Vec xi;
    cplx coefficient;  // u_hat * dxi^n
};

std::vector<ActiveFrequency> active_frequencies(const GriddedField& u) {
    const std::vector<cplx> spec = forward_transform(u);
    double peak = 0.0;
    for (const cplx& v : spec) peak = std::max(peak, std::abs(v));
    std::vector<ActiveFrequency> out;
    if (peak == 0.0) return out;
    const double cell = std::pow(u.frequency_spacing(), u.dimension());
    for (std::size_t i = 0; i < spec.size(); ++i)
        if (std::abs(spec[i]) > 1e-15 * peak) out.push_back({u.frequency(i), spec[i] * cell});
    return out;
}

double phase_or_zero(const PhaseSpec& phase, double t, const Vec& x, const Vec& xi) {
    return xi.squaredNorm() == 0.0 ? 0.0 : phase(t, x, xi);
}

}  // namespace

std::vector<cplx> fio_apply(const PhaseSpec& phase, const AmplitudeSpec& amplitude, const GriddedField& u, double t,
                            const std::vector<Vec>& eval_points, FioMode* mode_used) {
    const int n = u.dimension();
    if (phase.dimension() != n) throw UsageError("phase and field dimensions differ");
    const bool direct = phase.depends_on_x() || amplitude.depends_on_x();
    if (direct && n > 2) throw CapabilityError("x-dependent phases are supported for n <= 2 only");
    if (mode_used) *mode_used = direct ? FioMode::Direct : FioMode::Multiplier;
    const auto active = active_frequencies(u);
    std::vector<cplx> out(eval_points.size(), cplx(0.0, 0.0));
    if (active.empty()) return out;

    if (!direct) {
        const Vec x0 = Vec::Zero(n);
        std::vector<cplx> weight(active.size());
        for (std::size_t k = 0; k < active.size(); ++k) {
            const double arg = t * phase_or_zero(phase, t, x0, active[k].xi);
            weight[k] = amplitude(t, x0, active[k].xi) * cplx(std::cos(arg), std::sin(arg)) * active[k].coefficient;
        }
        parallel_for(eval_points.size(), [&](std::size_t i) {
            const Vec& x = eval_points[i];
            cplx s(0.0, 0.0);
            for (std::size_t k = 0; k < active.size(); ++k) {
                if (weight[k] == cplx(0.0, 0.0)) continue;
                const double arg = x.dot(active[k].xi);
                s += weight[k] * cplx(std::cos(arg), std::sin(arg));
            }
            out[i] = s;
        });
        return out;
    }
    parallel_for(eval_points.size(), [&](std::size_t i) {
        const Vec& x = eval_points[i];
        cplx s(0.0, 0.0);
        for (const auto& f : active) {
            const double a = amplitude(t, x, f.xi);
            if (a == 0.0) continue;
            const double arg = x.dot(f.xi) + t * phase_or_zero(phase, t, x, f.xi);
            s += a * f.coefficient * cplx(std::cos(arg), std::sin(arg));
        }
        out[i] = s;
    });
    return out;
}

GriddedField fio_field(const PhaseSpec& phase, const AmplitudeSpec& amplitude, const GriddedField& u, double t) {
    const int n = u.dimension();
    if (phase.depends_on_x() || amplitude.depends_on_x())
        throw CapabilityError("gridded evaluation needs an x-independent phase and amplitude");
    std::vector<cplx> spec = forward_transform(u);
    const Vec x0 = Vec::Zero(n);
    const double norm = std::pow(2.0 * M_PI, n);
    for (std::size_t i = 0; i < spec.size(); ++i) {
        if (spec[i] == cplx(0.0, 0.0)) continue;
        const Vec xi = u.frequency(i);
        const double arg = t * phase_or_zero(phase, t, x0, xi);
        spec[i] *= norm * amplitude(t, x0, xi) * cplx(std::cos(arg), std::sin(arg));
    }
    return inverse_transform(spec, n, u.extent(), u.points());
}

cplx annulus_radial_transform(const AnnulusProfile& profile, int n, double lambda) {
    const double c = profile.center, s = profile.width;
    const double g = std::sqrt(2.0 * M_PI) * s * std::exp(-0.5 * s * s * lambda * lambda);
    const cplx carrier(std::cos(lambda * c), std::sin(lambda * c));
    const cplx m1(c, s * s * lambda);
    switch (n) {
        case 1: return g * carrier;
        case 2: return g * carrier * m1;
        case 3: return g * carrier * (m1 * m1 + s * s);
        default: throw CapabilityError("annulus transform is implemented for n = 1, 2, 3");
    }
}

RadialFio::RadialFio(PhaseSpec phase, AmplitudeSpec amplitude, AnnulusProfile profile, double rel_tol)
    : phase_(std::move(phase)), amplitude_(std::move(amplitude)), profile_(profile), rel_tol_(rel_tol),
      n_(phase_.dimension()) {
    if (n_ != 2 && n_ != 3) throw CapabilityError("radial FIO evaluation supports n = 2, 3");
    if (phase_.depends_on_x()) throw CapabilityError("radial FIO evaluation needs an x-independent phase");
    if (!amplitude_.constant_value()) throw CapabilityError("radial FIO evaluation needs a constant amplitude");
    speed_min_ = std::numeric_limits<double>::infinity();
    speed_max_ = 0.0;
    const Vec x0 = Vec::Zero(n_);
    for (const Vec& th : direction_grid(n_, n_ == 2 ? 0.5 : 3.0)) {
        const double g = phase_gradient(phase_, 0.0, x0, th).norm();
        speed_min_ = std::min(speed_min_, g);
        speed_max_ = std::max(speed_max_, g);
    }
}

const RadialFio::Nodes& RadialFio::nodes(int panels) {
    {
        std::lock_guard lock(mutex_);
        auto it = cache_.find(panels);
        if (it != cache_.end()) return *it->second;
    }
    auto set = std::make_unique<Nodes>();
    const Vec x0 = Vec::Zero(n_);
    std::vector<double> a, wa, b, wb;
    auto add = [&](const Vec& th, double w) {
        for (int d = 0; d < n_; ++d) set->theta.push_back(th[d]);
        set->phi.push_back(phase_(0.0, x0, th));
        set->weights.push_back(w);
    };
    if (n_ == 2) {
        panel_nodes(0.0, 2.0 * M_PI, panels, a, wa);
        for (std::size_t i = 0; i < a.size(); ++i) add(unit_direction(2, a[i]), wa[i]);
    } else {
        panel_nodes(0.0, M_PI, panels, a, wa);
        panel_nodes(0.0, 2.0 * M_PI, 2 * panels, b, wb);
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j) add(unit_direction(3, a[i], b[j]), wa[i] * wb[j] * std::sin(a[i]));
    }
    std::lock_guard lock(mutex_);
    auto& slot = cache_[panels];
    if (!slot) slot = std::move(set);
    return *slot;
}

cplx RadialFio::sum(const Nodes& set, double t, const Vec& x) const {
    // Psi is negligible once sigma^2 lambda^2 / 2 exceeds 40.
    const double cutoff = std::sqrt(80.0) / profile_.width;
    cplx total(0.0, 0.0);
    const double* th = set.theta.data();
    for (std::size_t i = 0; i < set.weights.size(); ++i, th += n_) {
        double lambda = t * set.phi[i];
        for (int d = 0; d < n_; ++d) lambda += x[d] * th[d];
        if (std::abs(lambda) > cutoff) continue;
        total += set.weights[i] * annulus_radial_transform(profile_, n_, lambda);
    }
    return total;
}

cplx RadialFio::operator()(double t, const Vec& x) {
    if (x.size() != n_) throw UsageError("evaluation point has the wrong dimension");
    double factor = *amplitude_.constant_value();
    const double c = amplitude_.cutoff();
    if (c > 0.0) {
        if (t * profile_.outer() <= c)
            return 0.0;
        if (t * profile_.inner() < 2.0 * c)
            throw CapabilityError("amplitude cutoff is not constant on the data support at this t");
    }
    // The integrand oscillates at rate ~ center * (|x| + t |grad phi|) per radian.
    const double rate = (profile_.center + 4.0 * profile_.width) * (x.norm() + std::abs(t) * speed_max_);
    const int panels = next_pow2(8.0 + 2.0 * rate / M_PI);
    return factor * sum(nodes(panels), t, x);
}

// ---------------------------------------------------------------------------
// Besov norms

double dyadic_profile(double s) {
    if (s <= 1.0) return 1.0;
    if (s >= 2.0) return 0.0;
    const double c = std::cos(0.5 * M_PI * (s - 1.0));
    return c * c;
}

double dyadic_block(int j, double radius) {
    if (j == 0) return dyadic_profile(radius);
    return dyadic_profile(radius / std::ldexp(1.0, j)) - dyadic_profile(radius / std::ldexp(1.0, j - 1));
}

BesovReport besov_norm(const GriddedField& u, const BesovSpec& spec) {
    const int n = u.dimension();
    const double top = u.nyquist() * std::sqrt(static_cast<double>(n));
    int J = spec.blocks;
    if (J <= 0) {
        J = 1;
        while (std::ldexp(1.0, J) < top) ++J;
    } else {
        if (std::ldexp(1.0, J - 1) > top) {
            std::ostringstream msg;
            msg << "grid too coarse for " << J << " dyadic blocks (largest grid frequency " << top << ")";
            throw ResolutionError(msg.str());
        }
        if (std::ldexp(1.0, J) < top) {
            std::ostringstream msg;
            msg << J << " dyadic blocks do not cover the grid frequencies up to " << top;
            throw ResolutionError(msg.str());
        }
    }
    const std::vector<cplx> spectrum = forward_transform(u);
    std::vector<double> radius(spectrum.size());
    for (std::size_t i = 0; i < spectrum.size(); ++i) radius[i] = u.frequency(i).norm();
    BesovReport rep;
    rep.blocks = J;
    const double cell = std::pow(u.spacing(), n);
    double sum = 0.0;
    for (int j = 0; j <= J; ++j) {
        std::vector<cplx> block(spectrum.size());
        bool any = false;
        for (std::size_t i = 0; i < spectrum.size(); ++i) {
            const double m = dyadic_block(j, radius[i]);
            block[i] = m * spectrum[i];
            any = any || (m != 0.0 && spectrum[i] != cplx(0.0, 0.0));
        }
        double l1 = 0.0;
        if (any) {
            const GriddedField piece = inverse_transform(block, n, u.extent(), u.points());
            for (const cplx& v : piece.values()) l1 += std::abs(v);
            l1 *= cell;
        }
        rep.block_l1.push_back(l1);
        const double weighted = std::pow(2.0, j * spec.r) * l1;
        sum += weighted * weighted;
    }
    rep.norm = std::sqrt(sum);
    return rep;
}

// ---------------------------------------------------------------------------
// van der Corput

double plateau_bump(double s, double inner, double outer) {
    const double a = std::abs(s);
    if (a <= inner) return 1.0;
    if (a >= outer) return 0.0;
    return smooth_step((outer - a) / (outer - inner));
}

std::vector<VdcRow> van_der_corput_1d(int k, const std::function<double(double)>& amplitude,
                                      std::pair<double, double> support, const std::vector<double>& lambdas,
                                      double abs_tol) {
    if (k < 2) throw UsageError("van der Corput order must be at least 2");
    const auto [lo, hi] = support;
    if (!(hi > lo)) throw UsageError("empty amplitude support");
    const double reach = std::max(std::abs(lo), std::abs(hi));
    std::vector<VdcRow> rows(lambdas.size());
    parallel_for(lambdas.size(), [&](std::size_t r) {
        const double lambda = lambdas[r];
        auto integrand = [&](double s) {
            const double arg = lambda * std::pow(s, k);
            return amplitude(s) * cplx(std::cos(arg), std::sin(arg));
        };
        // Phase derivative is at most lambda k reach^(k-1).
        int panels = next_pow2(8.0 + lambda * k * std::pow(reach, k - 1) * (hi - lo) / M_PI);
        cplx coarse = integrate_panels(integrand, lo, hi, panels, kGauss);
        for (;;) {
            if (panels > (1 << 22)) throw AccuracyError("van der Corput quadrature did not stabilise", std::abs(coarse), std::abs(coarse));
            panels *= 2;
            const cplx fine = integrate_panels(integrand, lo, hi, panels, kGauss);
            if (std::abs(fine - coarse) <= abs_tol) {
                coarse = fine;
                break;
            }
            coarse = fine;
        }
        rows[r].lambda = lambda;
        rows[r].value = coarse;
        rows[r].magnitude = std::abs(coarse);
        rows[r].ratio = rows[r].magnitude * std::pow(lambda, 1.0 / k);
    });
    return rows;
}

}  // namespace fresnel
