#include "fresnel/phase.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "fresnel/errors.hpp"
#include "fresnel/quadrature.hpp"

namespace fresnel {

std::string to_string(PhaseKind kind) {
    switch (kind) {
        case PhaseKind::Euclidean: return "euclidean";
        case PhaseKind::AnisotropicPower: return "anisotropic-power";
        case PhaseKind::Star: return "star";
        case PhaseKind::TimeAveraged: return "time-averaged";
        case PhaseKind::UserTable: return "user-table";
        case PhaseKind::Expression: return "expression";
    }
    return "unknown";
}

namespace {

template <class S>
S norm_of(std::span<const S> xi) {
    S s = xi[0] * xi[0];
    for (std::size_t i = 1; i < xi.size(); ++i) s = s + xi[i] * xi[i];
    using std::sqrt;
    return sqrt(s);
}

double norm_of(const Vec& xi) { return xi.norm(); }

std::vector<std::string> phase_variables(int n) {
    std::vector<std::string> vars{"t"};
    for (int i = 1; i <= n; ++i) vars.push_back("x" + std::to_string(i));
    for (int i = 1; i <= n; ++i) vars.push_back("xi" + std::to_string(i));
    return vars;
}

void require_dimension(int n, int lo) {
    if (n < lo) throw UsageError("phase dimension must be at least " + std::to_string(lo));
}

// Tensor-product central difference of f at xi for the multi-index alpha,
// with per-axis step h.
double tensor_difference(const std::function<double(const Vec&)>& f, const Vec& xi, std::span<const int> alpha,
                         double h, int accuracy, double* weight_mass) {
    const std::size_t n = alpha.size();
    std::vector<std::vector<double>> offsets(n), weights(n);
    double mass = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (alpha[i] == 0) {
            offsets[i] = {0.0};
            weights[i] = {1.0};
            continue;
        }
        offsets[i] = central_offsets(alpha[i], accuracy);
        weights[i] = finite_difference_weights(alpha[i], offsets[i]);
        double m = 0.0;
        for (double w : weights[i]) m += std::abs(w);
        mass *= m;
    }
    std::vector<std::size_t> idx(n, 0);
    double sum = 0.0;
    Vec point = xi;
    for (;;) {
        double w = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            point[static_cast<Eigen::Index>(i)] = xi[static_cast<Eigen::Index>(i)] + h * offsets[i][idx[i]];
            w *= weights[i][idx[i]];
        }
        if (w != 0.0) sum += w * f(point);
        std::size_t axis = 0;
        while (axis < n && ++idx[axis] == offsets[axis].size()) idx[axis++] = 0;
        if (axis == n) break;
    }
    int order = 0;
    for (int a : alpha) order += a;
    if (weight_mass) *weight_mass = mass / std::pow(h, order);
    return sum / std::pow(h, order);
}

// Richardson-extrapolated finite difference with a step-halving error estimate.
Derivative fd_partial(const std::function<double(const Vec&)>& f, const Vec& xi, std::span<const int> alpha,
                      const FiniteDifferenceOptions& fd) {
    int order = 0;
    for (int a : alpha) order += a;
    if (order == 0) return {f(xi), 0.0};
    const double scale = std::max(norm_of(xi), std::numeric_limits<double>::min());
    const double rel = order <= 2 ? fd.relative_step : std::pow(10.0, -3.0 + 0.5 * (order - 2));
    const double h = rel * scale;
    const int p = fd.accuracy;
    double mass = 0.0;
    const double coarse = tensor_difference(f, xi, alpha, h, p, nullptr);
    const double fine = tensor_difference(f, xi, alpha, 0.5 * h, p, &mass);
    const double factor = std::pow(2.0, p);
    const double extrapolated = (factor * fine - coarse) / (factor - 1.0);
    const double roundoff = 4.0 * std::numeric_limits<double>::epsilon() * std::abs(f(xi)) * mass;
    return {extrapolated, std::abs(fine - coarse) + roundoff};
}

template <class S>
S smooth_step_t(const S& u) {
    const double v = value_of(u);
    if (v <= 0.0) return constant_like(u, 0.0);
    if (v >= 1.0) return constant_like(u, 1.0);
    using std::exp;
    const S a = exp(-1.0 / u);
    const S b = exp(-1.0 / (1.0 - u));
    return a / (a + b);
}

template <class S>
S cutoff_factor(double t, std::span<const S> xi, double c) {
    if (c <= 0.0) return constant_like(xi[0], 1.0);
    return smooth_step_t((t * norm_of<S>(xi) - c) / c);
}

}  // namespace

double smooth_step(double u) { return smooth_step_t(u); }

// ---------------------------------------------------------------------------
// PhaseSpec

PhaseSpec PhaseSpec::from_parts(PhaseKind kind, int n, ValueFn value, JetFn jet, bool depends_on_t,
                                bool depends_on_x, std::string description) {
    require_dimension(n, 1);
    PhaseSpec p;
    p.kind_ = kind;
    p.n_ = n;
    p.value_ = std::move(value);
    p.jet_ = std::move(jet);
    p.depends_on_t_ = depends_on_t;
    p.depends_on_x_ = depends_on_x;
    p.description_ = std::move(description);
    return p;
}

PhaseSpec PhaseSpec::euclidean(int n, double radius) {
    if (!(radius > 0.0)) throw UsageError("euclidean phase radius must be positive");
    const double inv = 1.0 / radius;
    std::ostringstream d;
    d << "euclidean(radius=" << radius << ")";
    return from_parts(
        PhaseKind::Euclidean, n, [inv](double, const Vec&, const Vec& xi) { return inv * xi.norm(); },
        [inv](double, const Vec&, std::span<const Jet> xi) { return inv * norm_of<Jet>(xi); }, false, false,
        d.str());
}

PhaseSpec PhaseSpec::anisotropic_power(int n, int m) {
    if (m < 2 || m % 2 != 0) throw UsageError("anisotropic power exponent must be even and >= 2");
    const double inv = 1.0 / m;
    auto value = [m, inv](double, const Vec&, const Vec& xi) {
        // Scale by the max-norm to keep xi^m in range.
        const double s = xi.cwiseAbs().maxCoeff();
        if (s == 0.0) return 0.0;
        double sum = 0.0;
        for (Eigen::Index i = 0; i < xi.size(); ++i) sum += std::pow(xi[i] / s, m);
        return s * std::pow(sum, inv);
    };
    auto jet = [m, inv](double, const Vec&, std::span<const Jet> xi) {
        Jet sum = ipow(xi[0], m);
        for (std::size_t i = 1; i < xi.size(); ++i) sum = sum + ipow(xi[i], m);
        return pow(sum, inv);
    };
    return from_parts(PhaseKind::AnisotropicPower, n, value, jet, false, false,
                      "anisotropic-power(m=" + std::to_string(m) + ")");
}

PhaseSpec PhaseSpec::star(double eps, int k) {
    if (k < 1) throw UsageError("star angular frequency must be >= 1");
    if (!(std::abs(eps) < 1.0)) throw UsageError("star modulation amplitude must satisfy |eps| < 1");
    auto value = [eps, k](double, const Vec&, const Vec& xi) {
        const double r = std::hypot(xi[0], xi[1]);
        const std::complex<double> z(xi[0] / r, xi[1] / r);
        return r * (1.0 + eps * std::pow(z, k).real());
    };
    auto jet = [eps, k](double, const Vec&, std::span<const Jet> xi) {
        const Jet r = sqrt(xi[0] * xi[0] + xi[1] * xi[1]);
        // Re((a + ib)^k) by repeated complex multiplication.
        Jet re = xi[0], im = xi[1];
        for (int j = 1; j < k; ++j) {
            Jet nre = re * xi[0] - im * xi[1];
            im = re * xi[1] + im * xi[0];
            re = std::move(nre);
        }
        return r + eps * re / ipow(r, k - 1);
    };
    std::ostringstream d;
    d << "star(eps=" << eps << ", k=" << k << ")";
    return from_parts(PhaseKind::Star, 2, value, jet, false, false, d.str());
}

PhaseSpec PhaseSpec::user_table(int n, ValueFn value, bool depends_on_t, bool depends_on_x,
                                FiniteDifferenceOptions fd) {
    PhaseSpec p = from_parts(PhaseKind::UserTable, n, std::move(value), nullptr, depends_on_t, depends_on_x,
                             "user-table");
    p.fd_ = fd;
    return p;
}

PhaseSpec PhaseSpec::user_table(int n, ValueFn value, JetFn jet, bool depends_on_t, bool depends_on_x) {
    return from_parts(PhaseKind::UserTable, n, std::move(value), std::move(jet), depends_on_t, depends_on_x,
                      "user-table");
}

PhaseSpec PhaseSpec::expression(int n, const std::string& source) {
    require_dimension(n, 1);
    const Expr e = Expr::parse(source, phase_variables(n));
    bool dx = false;
    for (int i = 1; i <= n; ++i) dx = dx || !e.independent_of("x" + std::to_string(i));
    auto value = [e, n](double t, const Vec& x, const Vec& xi) {
        std::vector<double> v(static_cast<std::size_t>(2 * n + 1));
        v[0] = t;
        for (int i = 0; i < n; ++i) {
            v[static_cast<std::size_t>(1 + i)] = x.size() > i ? x[i] : 0.0;
            v[static_cast<std::size_t>(1 + n + i)] = xi[i];
        }
        return e(std::span<const double>(v));
    };
    auto jet = [e, n](double t, const Vec& x, std::span<const Jet> xi) {
        std::vector<Jet> v;
        v.reserve(static_cast<std::size_t>(2 * n + 1));
        v.emplace_back(xi[0].layout(), t);
        for (int i = 0; i < n; ++i) v.emplace_back(xi[0].layout(), x.size() > i ? x[i] : 0.0);
        for (int i = 0; i < n; ++i) v.push_back(xi[static_cast<std::size_t>(i)]);
        return e(std::span<const Jet>(v));
    };
    return from_parts(PhaseKind::Expression, n, value, jet, !e.independent_of("t"), dx, source);
}

Jet PhaseSpec::jet(double t, const Vec& x, std::span<const Jet> xi) const {
    if (!jet_) throw CapabilityError("phase '" + description_ + "' has no Taylor-jet evaluator");
    return jet_(t, x, xi);
}

PhaseSpec PhaseSpec::with_finite_differences(FiniteDifferenceOptions fd) const {
    PhaseSpec p = *this;
    p.jet_ = nullptr;
    p.fd_ = fd;
    return p;
}

double eval_phase(const PhaseSpec& phase, double t, const Vec& x, const Vec& xi) {
    if (xi.size() != phase.dimension())
        throw UsageError("frequency dimension does not match the phase dimension");
    if (xi.squaredNorm() == 0.0) throw DomainError("phase evaluated at xi = 0");
    return phase(t, x, xi);
}

Derivative eval_phase_deriv(const PhaseSpec& phase, double t, const Vec& x, const Vec& xi,
                            std::span<const int> alpha) {
    if (static_cast<int>(alpha.size()) != phase.dimension())
        throw UsageError("multi-index length does not match the phase dimension");
    if (xi.size() != phase.dimension()) throw UsageError("frequency dimension does not match the phase dimension");
    if (xi.squaredNorm() == 0.0) throw DomainError("phase derivative evaluated at xi = 0");
    int order = 0;
    for (int a : alpha) {
        if (a < 0) throw UsageError("negative multi-index entry");
        order += a;
    }
    if (phase.has_jets()) {
        auto layout = JetLayout::get(phase.dimension(), order);
        std::vector<Jet> vars;
        for (int i = 0; i < phase.dimension(); ++i) vars.push_back(Jet::variable(layout, i, xi[i]));
        const Jet j = phase.jet(t, x, vars);
        return {j.derivative(alpha), 0.0};
    }
    if (order > 6) throw CapabilityError("finite-difference derivatives are limited to order 6");
    auto f = [&](const Vec& q) { return phase(t, x, q); };
    return fd_partial(f, xi, alpha, phase.fd_options());
}

Vec phase_gradient(const PhaseSpec& phase, double t, const Vec& x, const Vec& xi) {
    const int n = phase.dimension();
    Vec g(n);
    if (phase.has_jets()) {
        if (xi.squaredNorm() == 0.0) throw DomainError("phase gradient evaluated at xi = 0");
        auto layout = JetLayout::get(n, 1);
        std::vector<Jet> vars;
        for (int i = 0; i < n; ++i) vars.push_back(Jet::variable(layout, i, xi[i]));
        const Jet j = phase.jet(t, x, vars);
        for (int i = 0; i < n; ++i) g[i] = j.coefficients()[layout->unit_index(i)];
        return g;
    }
    std::vector<int> alpha(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        alpha[static_cast<std::size_t>(i)] = 1;
        g[i] = eval_phase_deriv(phase, t, x, xi, alpha).value;
        alpha[static_cast<std::size_t>(i)] = 0;
    }
    return g;
}

HomogeneityReport check_homogeneity(const PhaseSpec& phase, int sample_count, std::uint64_t seed) {
    if (sample_count < 1) throw UsageError("sample_count must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> time(0.5, 5.0);
    const int n = phase.dimension();
    HomogeneityReport report;
    for (int s = 0; s < sample_count; ++s) {
        Vec xi(n), x(n);
        do {
            for (int i = 0; i < n; ++i) xi[i] = normal(rng);
        } while (xi.norm() < 1e-3);
        for (int i = 0; i < n; ++i) x[i] = normal(rng);
        const double t = time(rng);
        const double base = eval_phase(phase, t, x, xi);
        for (double lambda : {0.5, 2.0, 10.0}) {
            const double scaled = eval_phase(phase, t, x, Vec(lambda * xi));
            const double dev = std::abs(scaled - lambda * base) / std::abs(lambda * base);
            report.max_relative_deviation = std::max(report.max_relative_deviation, dev);
            ++report.samples;
        }
    }
    return report;
}

PhaseBounds phase_bounds(const PhaseSpec& phase, const std::vector<Vec>& directions,
                         const std::vector<double>& t_grid, const std::vector<Vec>& x_grid) {
    if (directions.empty() || t_grid.empty() || x_grid.empty()) throw UsageError("phase_bounds needs nonempty grids");
    PhaseBounds b;
    b.lower = std::numeric_limits<double>::infinity();
    b.upper = -std::numeric_limits<double>::infinity();
    for (double t : t_grid)
        for (const Vec& x : x_grid)
            for (const Vec& th : directions) {
                const double v = eval_phase(phase, t, x, th);
                if (!(v > 0.0)) {
                    std::ostringstream msg;
                    msg << "phase is not positive at t=" << t << ", direction (" << th.transpose() << ")";
                    throw HypothesisViolation(msg.str());
                }
                if (v < b.lower) {
                    b.lower = v;
                    b.argmin = th;
                }
                if (v > b.upper) {
                    b.upper = v;
                    b.argmax = th;
                }
            }
    return b;
}

std::vector<Vec> direction_grid(int n, double resolution_deg) {
    if (!(resolution_deg > 0.0)) throw UsageError("angular resolution must be positive");
    std::vector<Vec> out;
    const double step = resolution_deg * M_PI / 180.0;
    if (n == 1) {
        out.push_back(Vec::Constant(1, 1.0));
        out.push_back(Vec::Constant(1, -1.0));
    } else if (n == 2) {
        const int count = std::max(1, static_cast<int>(std::lround(360.0 / resolution_deg)));
        for (int k = 0; k < count; ++k) {
            const double a = 2.0 * M_PI * k / count;
            Vec v(2);
            v << std::cos(a), std::sin(a);
            out.push_back(v);
        }
    } else if (n == 3) {
        const int polar = std::max(1, static_cast<int>(std::lround(180.0 / resolution_deg)));
        const int azimuth = std::max(1, static_cast<int>(std::lround(360.0 / resolution_deg)));
        for (int i = 0; i <= polar; ++i) {
            const double th = M_PI * i / polar;
            const int count = (i == 0 || i == polar) ? 1 : azimuth;
            for (int k = 0; k < count; ++k) {
                const double ph = 2.0 * M_PI * k / azimuth;
                Vec v(3);
                v << std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th);
                out.push_back(v);
            }
        }
        (void)step;
    } else {
        throw CapabilityError("direction grids are available for n <= 3");
    }
    return out;
}

// ---------------------------------------------------------------------------
// TimeFunction

TimeFunction TimeFunction::constant(double value) {
    TimeFunction f;
    f.is_constant_ = true;
    f.constant_ = value;
    f.expr_.reset();
    f.fn_ = nullptr;
    std::ostringstream d;
    d << value;
    f.description_ = d.str();
    return f;
}

TimeFunction TimeFunction::expression(const std::string& source) {
    TimeFunction f = constant(0.0);
    f.is_constant_ = false;
    f.expr_ = Expr::parse(source, {"t"});
    f.description_ = source;
    return f;
}

TimeFunction TimeFunction::callable(std::function<double(double)> fn, std::string description) {
    TimeFunction f = constant(0.0);
    f.is_constant_ = false;
    f.fn_ = std::move(fn);
    f.description_ = std::move(description);
    return f;
}

double TimeFunction::operator()(double t) const {
    if (is_constant_) return constant_;
    if (expr_) {
        const double v[1] = {t};
        return (*expr_)(std::span<const double>(v, 1));
    }
    return fn_(t);
}

std::vector<double> TimeFunction::derivatives(double t, int order) const {
    std::vector<double> out(static_cast<std::size_t>(order) + 1, 0.0);
    if (is_constant_) {
        out[0] = constant_;
        return out;
    }
    if (expr_) {
        auto layout = JetLayout::get(1, order);
        const Jet v[1] = {Jet::variable(layout, 0, t)};
        const Jet j = (*expr_)(std::span<const Jet>(v, 1));
        double fact = 1.0;
        for (int k = 0; k <= order; ++k) {
            if (k > 0) fact *= k;
            out[static_cast<std::size_t>(k)] = fact * j.coefficients()[static_cast<std::size_t>(k)];
        }
        return out;
    }
    out[0] = fn_(t);
    Vec at(1);
    at[0] = t;
    for (int k = 1; k <= order; ++k) {
        // Steps scale with 1 + |t| since class-T derivatives decay in t.
        FiniteDifferenceOptions fd;
        fd.relative_step = 1e-3;
        const int alpha[1] = {k};
        auto f = [&](const Vec& q) { return fn_(q[0]); };
        const double scale = 1.0 + std::abs(t);
        Vec shifted(1);
        shifted[0] = scale;  // step is relative to |point|, so evaluate in a shifted frame
        auto g = [&](const Vec& q) {
            Vec r(1);
            r[0] = t + (q[0] - scale);
            return f(r);
        };
        out[static_cast<std::size_t>(k)] = fd_partial(g, shifted, std::span<const int>(alpha, 1), fd).value;
    }
    return out;
}

// ---------------------------------------------------------------------------
// AmplitudeSpec

AmplitudeSpec AmplitudeSpec::unit() { return constant(1.0); }

AmplitudeSpec AmplitudeSpec::constant(double value) {
    AmplitudeSpec a;
    a.constant_ = value;
    a.fn_ = [value](double, const Vec&, const Vec&) { return value; };
    a.radial_ = true;
    std::ostringstream d;
    d << value;
    a.description_ = d.str();
    return a;
}

AmplitudeSpec AmplitudeSpec::expression(int n, const std::string& source) {
    AmplitudeSpec a;
    a.expr_ = Expr::parse(source, phase_variables(n));
    a.n_ = n;
    const Expr e = *a.expr_;
    bool dx = false;
    for (int i = 1; i <= n; ++i) dx = dx || !e.independent_of("x" + std::to_string(i));
    a.depends_on_x_ = dx;
    a.radial_ = false;
    a.fn_ = [e, n](double t, const Vec& x, const Vec& xi) {
        std::vector<double> v(static_cast<std::size_t>(2 * n + 1));
        v[0] = t;
        for (int i = 0; i < n; ++i) {
            v[static_cast<std::size_t>(1 + i)] = x.size() > i ? x[i] : 0.0;
            v[static_cast<std::size_t>(1 + n + i)] = xi[i];
        }
        return e(std::span<const double>(v));
    };
    a.description_ = source;
    return a;
}

AmplitudeSpec AmplitudeSpec::callable(Fn fn, bool radial) {
    AmplitudeSpec a;
    a.fn_ = std::move(fn);
    a.radial_ = radial;
    a.depends_on_x_ = true;
    a.description_ = "callable";
    return a;
}

AmplitudeSpec AmplitudeSpec::with_cutoff(double c) const {
    if (c < 0.0) throw UsageError("cutoff constant must be nonnegative");
    AmplitudeSpec a = *this;
    a.cutoff_ = c;
    return a;
}

double AmplitudeSpec::operator()(double t, const Vec& x, const Vec& xi) const {
    const double base = fn_(t, x, xi);
    if (cutoff_ <= 0.0) return base;
    return base * smooth_step((t * xi.norm() - cutoff_) / cutoff_);
}

double AmplitudeSpec::radial(double t, double s) const {
    const int n = n_ > 0 ? n_ : 2;
    Vec xi = Vec::Zero(n);
    xi[0] = s;
    return (*this)(t, Vec::Zero(n), xi);
}

double AmplitudeSpec::derivative(double t, const Vec& x, const Vec& xi, std::span<const int> alpha) const {
    int order = 0;
    for (int a : alpha) order += a;
    const int n = static_cast<int>(xi.size());
    if (expr_ || constant_) {
        auto layout = JetLayout::get(n, order);
        std::vector<Jet> vars;
        for (int i = 0; i < n; ++i) vars.push_back(Jet::variable(layout, i, xi[i]));
        Jet value(layout, constant_.value_or(0.0));
        if (expr_) {
            std::vector<Jet> v;
            v.emplace_back(layout, t);
            for (int i = 0; i < n; ++i) v.emplace_back(layout, x.size() > i ? x[i] : 0.0);
            for (const Jet& j : vars) v.push_back(j);
            value = (*expr_)(std::span<const Jet>(v));
        }
        value = value * cutoff_factor<Jet>(t, vars, cutoff_);
        return value.derivative(alpha);
    }
    auto f = [&](const Vec& q) { return (*this)(t, x, q); };
    return fd_partial(f, xi, alpha, FiniteDifferenceOptions{}).value;
}

SymbolEstimateReport check_symbol_estimate(const AmplitudeSpec& amplitude, int max_order,
                                           const std::vector<Vec>& directions, const std::vector<double>& radii,
                                           double t, const Vec& x) {
    if (directions.empty() || radii.empty()) throw UsageError("symbol estimate needs nonempty grids");
    SymbolEstimateReport report;
    report.constants.assign(static_cast<std::size_t>(max_order) + 1, 0.0);
    const int n = static_cast<int>(directions.front().size());
    auto layout = JetLayout::get(n, max_order);
    for (const Vec& th : directions)
        for (double r : radii) {
            const Vec xi = r * th;
            const double bracket = std::sqrt(1.0 + r * r);
            for (std::size_t idx = 0; idx < layout->size(); ++idx) {
                const auto alpha = layout->exponents(idx);
                const int k = layout->degree(idx);
                const double d = amplitude.derivative(t, x, xi, alpha);
                if (!std::isfinite(d)) throw DataError("non-finite amplitude derivative");
                auto& c = report.constants[static_cast<std::size_t>(k)];
                c = std::max(c, std::abs(d) * std::pow(bracket, k));
            }
        }
    for (std::size_t k = 0; k < report.constants.size() && k < amplitude.seminorm_budget.size(); ++k)
        if (report.constants[k] > amplitude.seminorm_budget[k]) report.satisfied = false;
    return report;
}

// ---------------------------------------------------------------------------
// Coefficient classes

double class_weight(double t, double nu) {
    const double v = t * std::pow(std::log(M_E + std::abs(t)), nu);
    return std::sqrt(1.0 + v * v);
}

std::vector<double> SymbolClassSpec::default_t_grid(double t_max) {
    if (!(t_max > 0.0)) throw UsageError("t_max must be positive");
    std::vector<double> grid;
    const double dense_end = std::min(10.0, t_max);
    const int dense = static_cast<int>(std::ceil(dense_end / 0.05));
    for (int i = 0; i <= dense; ++i) grid.push_back(dense_end * i / dense);
    if (t_max > dense_end) {
        const int count = 1000;
        const double la = std::log(dense_end), lb = std::log(t_max);
        for (int i = 1; i <= count; ++i) grid.push_back(std::exp(la + (lb - la) * i / count));
    }
    return grid;
}

namespace {

struct ClassAccumulator {
    int K;
    std::vector<double> t;
    // samples[k][i]: ratio of the k-th derivative at t[i], maximised over the inner family
    std::vector<std::vector<double>> ratio;
    double value_scale = 0.0;

    explicit ClassAccumulator(int k, std::vector<double> grid)
        : K(k), t(std::move(grid)), ratio(static_cast<std::size_t>(k) + 1, std::vector<double>(t.size(), 0.0)) {}

    void add(std::size_t i, int k, double derivative, double weight_power) {
        if (!std::isfinite(derivative)) {
            std::ostringstream msg;
            msg << "non-finite derivative of order " << k << " at t=" << t[i];
            throw DataError(msg.str());
        }
        auto& r = ratio[static_cast<std::size_t>(k)][i];
        r = std::max(r, std::abs(derivative) / weight_power);
        if (k == 0) value_scale = std::max(value_scale, std::abs(derivative));
    }

    SymbolClassReport finish(double growth_factor) const {
        SymbolClassReport rep;
        rep.grid_size = t.size();
        const double t_max = *std::max_element(t.begin(), t.end());
        const double split = t_max / 10.0;
        const double slack = 1e-12 * (1.0 + value_scale);
        for (int k = 0; k <= K; ++k) {
            const auto& r = ratio[static_cast<std::size_t>(k)];
            double sup = 0.0, tail = 0.0, prior = 0.0, first = 0.0, arg = t.front();
            for (std::size_t i = 0; i < t.size(); ++i) {
                if (r[i] > sup) {
                    sup = r[i];
                    arg = t[i];
                }
                if (t[i] >= split)
                    tail = std::max(tail, r[i]);
                else
                    prior = std::max(prior, r[i]);
                if (t[i] <= 1.0) first = std::max(first, r[i]);
            }
            rep.constants.push_back(sup);
            rep.tail_sup.push_back(tail);
            rep.prior_sup.push_back(prior);
            rep.witness_t.push_back(arg);
            rep.growth.push_back(first > 0.0 ? sup / first : (sup > slack ? std::numeric_limits<double>::infinity() : 1.0));
            if (tail > growth_factor * prior + slack) rep.member = false;
        }
        return rep;
    }
};

std::vector<double> class_grid(const SymbolClassSpec& spec) {
    std::vector<double> grid = spec.t_grid.empty() ? SymbolClassSpec::default_t_grid(1e4) : spec.t_grid;
    if (grid.size() < 2) throw UsageError("symbol-class t grid needs at least two points");
    std::sort(grid.begin(), grid.end());
    return grid;
}

double class_order(const SymbolClassSpec& spec) {
    return spec.kind == SymbolClassKind::S ? spec.m2 : spec.ell;
}

double class_nu(const SymbolClassSpec& spec) { return spec.kind == SymbolClassKind::TNu ? spec.nu : 0.0; }

}  // namespace

SymbolClassReport check_symbol_class(const TimeFunction& f, const SymbolClassSpec& spec) {
    if (spec.max_order < 0) throw UsageError("max derivative order must be nonnegative");
    if (spec.kind == SymbolClassKind::TNu && (spec.nu < 0.0 || spec.nu > 1.0))
        throw UsageError("nu must lie in [0, 1]");
    ClassAccumulator acc(spec.max_order, class_grid(spec));
    const double ell = class_order(spec), nu = class_nu(spec);
    for (std::size_t i = 0; i < acc.t.size(); ++i) {
        const double t = acc.t[i];
        const auto d = f.derivatives(t, spec.max_order);
        const double w = class_weight(t, nu);
        for (int k = 0; k <= spec.max_order; ++k) acc.add(i, k, d[static_cast<std::size_t>(k)], std::pow(w, ell - k));
    }
    return acc.finish(spec.growth_factor);
}

SymbolClassReport check_symbol_class(const Expr& symbol, int n, const SymbolClassSpec& spec) {
    if (spec.xi_grid.empty()) throw UsageError("S{m1, m2} check needs a xi grid");
    const int K = spec.max_order, L = spec.max_xi_order;
    ClassAccumulator acc(K, class_grid(spec));
    const double nu = class_nu(spec);
    // Variables: t, xi1..xin
    auto layout = JetLayout::get(n + 1, K + L);
    auto xi_layout = JetLayout::get(n, L);
    for (std::size_t i = 0; i < acc.t.size(); ++i) {
        const double t = acc.t[i];
        const double w = class_weight(t, nu);
        for (const Vec& xi : spec.xi_grid) {
            std::vector<Jet> vars;
            vars.push_back(Jet::variable(layout, 0, t));
            for (int d = 0; d < n; ++d) vars.push_back(Jet::variable(layout, d + 1, xi[d]));
            const Jet a = symbol(std::span<const Jet>(vars));
            const double r = xi.norm();
            for (std::size_t b = 0; b < xi_layout->size(); ++b) {
                const auto beta = xi_layout->exponents(b);
                const int order = xi_layout->degree(b);
                const double scale = std::pow(r, order - spec.m1);
                std::vector<int> full(static_cast<std::size_t>(n) + 1);
                for (int d = 0; d < n; ++d) full[static_cast<std::size_t>(d) + 1] = beta[static_cast<std::size_t>(d)];
                for (int k = 0; k <= K; ++k) {
                    full[0] = k;
                    acc.add(i, k, scale * a.derivative(full), std::pow(w, spec.m2 - k));
                }
            }
        }
    }
    return acc.finish(spec.growth_factor);
}

}  // namespace fresnel
