#include "fresnel/decay.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "fresnel/errors.hpp"
#include "fresnel/parallel.hpp"

namespace fresnel {

double measure_sup(std::span<const cplx> values) {
    if (values.empty()) throw UsageError("sup over an empty evaluation set");
    double m = 0.0;
    for (const cplx& v : values) m = std::max(m, std::abs(v));
    return m;
}

double measure_sup(std::span<const double> values) {
    if (values.empty()) throw UsageError("sup over an empty evaluation set");
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

void DecaySeries::add(double time, double sup) {
    t.push_back(time);
    s.push_back(sup);
}

void DecaySeries::validate() const {
    if (t.size() != s.size()) throw DataError("decay series has mismatched columns");
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(s[i] > 0.0)) throw DataError("decay series has a non-positive sup norm");
        if (i > 0 && !(t[i] > t[i - 1])) throw DataError("decay series times must be strictly increasing");
    }
}

DecayFit fit_decay(const DecaySeries& series, const FitWindow& window) {
    series.validate();
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < series.t.size(); ++i)
        if (series.t[i] >= window.t_min && series.t[i] <= window.t_max) {
            lx.push_back(std::log(series.t[i]));
            ly.push_back(std::log(series.s[i]));
        }
    if (lx.size() < 8) throw FitError("decay fit needs at least 8 samples inside the window");
    if (lx.back() - lx.front() < std::log(10.0) - 1e-12) throw FitError("decay fit window spans less than a decade");
    const double k = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
    mx /= k;
    my /= k;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    DecayFit fit;
    fit.exponent = sxy / sxx;
    fit.constant = my - fit.exponent * mx;
    for (std::size_t i = 0; i < lx.size(); ++i)
        fit.residual = std::max(fit.residual, std::abs(ly[i] - fit.constant - fit.exponent * lx[i]));
    fit.t_min = std::exp(lx.front());
    fit.t_max = std::exp(lx.back());
    fit.samples = static_cast<int>(lx.size());
    return fit;
}

RatePrediction predict_rate(const ContactReport& report, int n) {
    RatePrediction p;
    p.convex = report.convex;
    p.inconclusive = report.inconclusive;
    p.order = report.convex ? report.gamma : report.gamma0;
    if (p.order < 2) {
        p.inconclusive = true;
        return p;
    }
    if (report.convex) {
        p.exponent = -(n - 1.0) / p.order;
        p.regularity = n - (n - 1.0) / p.order;
        p.branch = "convex";
    } else {
        p.exponent = -1.0 / p.order;
        p.regularity = n - 1.0 / p.order;
        p.branch = "non-convex";
    }
    return p;
}

LpLqRate lp_lq_rate(double p, int n, int gamma) {
    if (!(p >= 1.0 && p <= 2.0)) throw DomainError("lp_lq_rate needs p in [1, 2]");
    if (gamma < 2) throw DomainError("contact order must be at least 2");
    LpLqRate r;
    r.p = p;
    r.q = p == 1.0 ? std::numeric_limits<double>::infinity() : p / (p - 1.0);
    r.endpoint = p == 1.0 || p == 2.0;
    if (!r.endpoint && gamma != 2) throw CapabilityError("interpolated L^p-L^q rates are only stated for gamma = 2");
    const double gap = 1.0 / p - (p == 1.0 ? 0.0 : 1.0 / r.q);
    r.exponent = gap == 0.0 ? 0.0 : -((n - 1.0) / gamma) * gap;
    r.regularity = n * gap;
    return r;
}

// ---------------------------------------------------------------------------
// L2 condition

namespace {

std::vector<std::vector<int>> multi_indices(int n, int degree) {
    std::vector<std::vector<int>> out;
    std::vector<int> a(static_cast<std::size_t>(n), 0);
    std::function<void(int, int)> rec = [&](int pos, int left) {
        if (pos == n - 1) {
            a[static_cast<std::size_t>(pos)] = left;
            out.push_back(a);
            return;
        }
        for (int v = left; v >= 0; --v) {
            a[static_cast<std::size_t>(pos)] = v;
            rec(pos + 1, left - v);
        }
    };
    rec(0, degree);
    return out;
}

// d_x^alpha d_xi^beta g by tensor products of second-order central stencils.
double mixed_derivative(const std::function<double(const Vec&, const Vec&)>& g, const Vec& x, const Vec& xi,
                        const std::vector<int>& alpha, const std::vector<int>& beta) {
    const int n = static_cast<int>(x.size());
    int order = 0;
    for (int v : alpha) order += v;
    for (int v : beta) order += v;
    const double h = std::pow(10.0, -16.0 / (order + 2));
    const double hx = h * std::max(1.0, x.norm());
    const double hxi = h * xi.norm();
    struct Axis {
        bool on_x;
        int index;
        int k;
    };
    std::vector<Axis> axes;
    for (int i = 0; i < n; ++i) {
        if (alpha[static_cast<std::size_t>(i)] > 0) axes.push_back({true, i, alpha[static_cast<std::size_t>(i)]});
        if (beta[static_cast<std::size_t>(i)] > 0) axes.push_back({false, i, beta[static_cast<std::size_t>(i)]});
    }
    auto stencil = [](int k) -> std::vector<std::pair<int, double>> {
        if (k == 1) return {{-1, -0.5}, {1, 0.5}};
        if (k == 2) return {{-1, 1.0}, {0, -2.0}, {1, 1.0}};
        throw CapabilityError("mixed derivative order per axis must be <= 2");
    };
    double total = 0.0;
    std::function<void(std::size_t, Vec&, Vec&, double)> rec = [&](std::size_t a, Vec& px, Vec& pxi, double w) {
        if (a == axes.size()) {
            total += w * g(px, pxi);
            return;
        }
        const Axis& ax = axes[a];
        const double step = ax.on_x ? hx : hxi;
        for (auto [off, c] : stencil(ax.k)) {
            Vec& target = ax.on_x ? px : pxi;
            const double saved = target[ax.index];
            target[ax.index] = saved + off * step;
            rec(a + 1, px, pxi, w * c / std::pow(step, ax.k));
            target[ax.index] = saved;
        }
    };
    Vec px = x, pxi = xi;
    rec(0, px, pxi, 1.0);
    return total;
}

}  // namespace

L2ConditionReport check_l2_conditions(const PhaseSpec& phase, const std::vector<double>& t_grid,
                                      const std::vector<Vec>& x_grid, const std::vector<Vec>& directions,
                                      double threshold) {
    if (t_grid.empty() || x_grid.empty() || directions.empty()) throw UsageError("L2 condition check needs nonempty grids");
    const int n = phase.dimension();
    L2ConditionReport report;
    report.threshold = threshold;
    report.note = "derivative orders above 2 are not checked";
    report.witness_t = t_grid.front();
    report.witness_x = x_grid.front();
    report.witness_xi = directions.front() / directions.front().norm();
    if (!phase.depends_on_x()) {
        report.c0 = 1.0;
        return report;
    }
    report.c0 = std::numeric_limits<double>::infinity();
    std::vector<std::vector<int>> xa[3], xb[3];
    for (int d = 1; d <= 2; ++d) xa[d] = xb[d] = multi_indices(n, d);
    for (double t : t_grid) {
        auto g = [&](const Vec& x, const Vec& xi) { return phase(t, x, xi); };
        for (const Vec& d : directions) {
            const Vec xi = d / d.norm();
            int last_sign = 0;
            for (const Vec& x : x_grid) {
                Mat m = Mat::Identity(n, n);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        std::vector<int> a(static_cast<std::size_t>(n), 0), b(static_cast<std::size_t>(n), 0);
                        a[static_cast<std::size_t>(i)] = 1;
                        b[static_cast<std::size_t>(j)] = 1;
                        m(i, j) += t * mixed_derivative(g, x, xi, a, b);
                    }
                const double det = m.determinant();
                const int sign = det > 0.0 ? 1 : (det < 0.0 ? -1 : 0);
                if (last_sign != 0 && sign != 0 && sign != last_sign) report.sign_change = true;
                if (sign != 0) last_sign = sign;
                if (std::abs(det) < report.c0) {
                    report.c0 = std::abs(det);
                    report.witness_t = t;
                    report.witness_x = x;
                    report.witness_xi = xi;
                }
                for (int da = 1; da <= 2; ++da)
                    for (int db = 1; db <= 2; ++db) {
                        double sup = 0.0;
                        for (const auto& a : xa[da])
                            for (const auto& b : xb[db])
                                sup = std::max(sup, std::abs(std::pow(t, da) * mixed_derivative(g, x, xi, a, b)));
                        std::ostringstream key;
                        key << da << "," << db;
                        double& slot = report.bounds[key.str()];
                        slot = std::max(slot, sup);
                    }
            }
        }
    }
    report.violated = report.c0 < threshold || report.sign_change;
    if (report.sign_change) report.c0 = 0.0;
    return report;
}

// ---------------------------------------------------------------------------
// L2 uniformity

FieldOperator normalized_fio(const PhaseSpec& phase, const AmplitudeSpec& amplitude) {
    return [phase, amplitude](const GriddedField& u, double t) {
        GriddedField out = fio_field(phase, amplitude, u, t);
        const double scale = std::pow(2.0 * M_PI, -u.dimension());
        for (cplx& v : out.values()) v *= scale;
        return out;
    };
}

L2UniformityReport check_l2_uniformity(const FieldOperator& apply, const std::vector<GriddedField>& tests,
                                       const std::vector<double>& t_grid) {
    if (tests.empty() || t_grid.empty()) throw UsageError("L2 uniformity check needs test functions and times");
    L2UniformityReport report;
    report.max_ratio = 0.0;
    report.min_ratio = std::numeric_limits<double>::infinity();
    for (const GriddedField& u : tests) {
        const double base = u.l2_norm();
        if (!(base > 0.0)) throw UsageError("L2 uniformity test function is zero");
        std::vector<double> row(t_grid.size());
        parallel_for(t_grid.size(), [&](std::size_t i) { row[i] = apply(u, t_grid[i]).l2_norm() / base; });
        for (double r : row) {
            report.max_ratio = std::max(report.max_ratio, r);
            report.min_ratio = std::min(report.min_ratio, r);
        }
        report.ratios.push_back(std::move(row));
    }
    return report;
}

GriddedField random_band_limited(int n, double extent, int points, double band, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    GriddedField probe(n, extent, points);
    std::vector<cplx> spec(probe.size());
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const double s = probe.frequency(i).norm() / band;
        const double re = normal(rng), im = normal(rng);
        spec[i] = s < 1.0 ? cplx(re, im) * smooth_step(4.0 * (1.0 - s)) : cplx(0.0, 0.0);
    }
    return inverse_transform(spec, n, extent, points);
}

// ---------------------------------------------------------------------------
// Sampling helpers

std::vector<Vec> ray_points(double radius, int rays, int per_ray, double angle_offset) {
    if (rays < 1 || per_ray < 2) throw UsageError("ray sampling needs at least one ray and two points");
    std::vector<Vec> pts;
    pts.reserve(static_cast<std::size_t>(rays * per_ray));
    for (int k = 0; k < rays; ++k) {
        const double a = angle_offset + 2.0 * M_PI * k / rays;
        for (int i = 0; i < per_ray; ++i) {
            const double r = radius * i / (per_ray - 1);
            Vec p(2);
            p << r * std::cos(a), r * std::sin(a);
            pts.push_back(p);
        }
    }
    return pts;
}

double envelope_sup(const std::function<double(double)>& f, double r0, double factor, double step) {
    const double r1 = factor * r0;
    const int count = std::max(2, static_cast<int>(std::ceil((r1 - r0) / step)) + 1);
    std::vector<double> rs(static_cast<std::size_t>(count)), vals(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) rs[static_cast<std::size_t>(i)] = r0 + (r1 - r0) * i / (count - 1);
    parallel_for(rs.size(), [&](std::size_t i) { vals[i] = f(rs[i]); });
    const auto best = static_cast<std::size_t>(std::max_element(vals.begin(), vals.end()) - vals.begin());
    double a = std::max(r0, rs[best] - step), b = std::min(r1, rs[best] + step);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 30; ++it) {
        if (fc > fd) {
            b = d; d = c; fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return std::max({vals[best], fc, fd});
}

std::vector<double> log_space(double a, double b, int count) {
    if (count < 2 || !(a > 0.0) || !(b > a)) throw UsageError("log_space needs 0 < a < b and count >= 2");
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = a * std::pow(b / a, static_cast<double>(i) / (count - 1));
    out.back() = b;
    return out;
}

}  // namespace fresnel
