#include "fresnel/evolution.hpp"

#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <map>
#include <sstream>

#include "fresnel/errors.hpp"
#include "fresnel/parallel.hpp"
#include "fresnel/quadrature.hpp"

namespace fresnel {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::vector<double>;

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

double monomial(const Vec& xi, const std::vector<int>& alpha, int degree) {
    if (alpha.empty()) return std::pow(xi.norm(), degree);
    double v = 1.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) v *= std::pow(xi[static_cast<Eigen::Index>(i)], alpha[i]);
    return v;
}

void check_xi(const Vec& xi, int n) {
    if (xi.size() != n) throw UsageError("frequency has the wrong dimension");
    if (!(xi.norm() > 0.0)) throw DomainError("characteristic roots need xi != 0");
}

}  // namespace

// ---------------------------------------------------------------------------
// Specs

WaveModelSpec WaveModelSpec::isotropic_model(int n, TimeFunction a) {
    WaveModelSpec s;
    s.n = n;
    s.a.assign(static_cast<std::size_t>(n), std::vector<TimeFunction>(static_cast<std::size_t>(n), TimeFunction::constant(0.0)));
    for (int i = 0; i < n; ++i) s.a[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = a;
    s.isotropic = true;
    return s;
}

WaveModelSpec WaveModelSpec::diagonal(std::vector<TimeFunction> diag) {
    WaveModelSpec s;
    s.n = static_cast<int>(diag.size());
    s.a.assign(diag.size(), std::vector<TimeFunction>(diag.size(), TimeFunction::constant(0.0)));
    for (std::size_t i = 0; i < diag.size(); ++i) s.a[i][i] = diag[i];
    return s;
}

Mat WaveModelSpec::matrix(double t) const {
    Mat m(n, n);
    if (isotropic) {
        m.setIdentity();
        return m * a[0][0](t);
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)](t);
    return m;
}

double WaveModelSpec::symbol(double t, const Vec& xi) const {
    if (isotropic) return a[0][0](t) * xi.squaredNorm();
    return xi.dot(matrix(t) * xi);
}

bool WaveModelSpec::constant_coefficients() const {
    for (const auto& row : a)
        for (const auto& f : row)
            if (!f.is_constant()) return false;
    return true;
}

std::vector<double> HigherOrderSpec::polynomial(double t, const Vec& xi) const {
    std::vector<double> c(static_cast<std::size_t>(m), 0.0);
    for (const Term& term : terms) {
        if (term.k < 0 || term.k >= m) throw UsageError("higher-order term has k outside [0, m)");
        c[static_cast<std::size_t>(term.k)] += term.coefficient(t) * monomial(xi, term.alpha, m - term.k);
    }
    return c;
}

bool HigherOrderSpec::constant_coefficients() const {
    return std::all_of(terms.begin(), terms.end(), [](const Term& term) { return term.coefficient.is_constant(); });
}

SystemSpec SystemSpec::diagonal_wave(int n) {
    SystemSpec s;
    s.n = n;
    s.m = 2;
    s.symbol = [](double, const Vec& xi) {
        CMat a = CMat::Zero(2, 2);
        a(0, 0) = xi.norm();
        a(1, 1) = -xi.norm();
        return a;
    };
    s.self_adjoint = true;
    s.constant_in_t = true;
    s.radial = true;
    return s;
}

int root_count(const EvolutionSpec& spec) {
    return std::visit(
        [](const auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, WaveModelSpec>) return 2;
            else return s.m;
        },
        spec);
}

int spatial_dimension(const EvolutionSpec& spec) {
    return std::visit([](const auto& s) { return s.n; }, spec);
}

namespace {

// Frequency groups (gridded) and radial nodes per batched ODE solve.
constexpr std::size_t kModeChunk = 256;
constexpr std::size_t kRadialChunk = 1024;

bool constant_in_time(const EvolutionSpec& spec) {
    if (const auto* w = std::get_if<WaveModelSpec>(&spec)) return w->constant_coefficients();
    if (const auto* h = std::get_if<HigherOrderSpec>(&spec)) return h->constant_coefficients();
    return std::get<SystemSpec>(spec).constant_in_t;
}

// Sorted roots without the gap check.
std::vector<double> raw_roots(const EvolutionSpec& spec, double t, const Vec& xi, double imag_tol) {
    const double scale = xi.norm();
    std::vector<double> roots;
    if (const auto* w = std::get_if<WaveModelSpec>(&spec)) {
        const double a = w->symbol(t, xi);
        if (a < 0.0) {
            std::ostringstream msg;
            msg << "wave symbol a(t, xi) = " << a << " is negative at t = " << t;
            throw HypothesisViolation(msg.str());
        }
        const double r = std::sqrt(a);
        roots = {-r, r};
    } else if (const auto* h = std::get_if<HigherOrderSpec>(&spec)) {
        const std::vector<double> c = h->polynomial(t, xi);
        const int m = h->m;
        Mat companion = Mat::Zero(m, m);
        for (int i = 1; i < m; ++i) companion(i, i - 1) = 1.0;
        for (int i = 0; i < m; ++i) companion(i, m - 1) = -c[static_cast<std::size_t>(i)];
        Eigen::EigenSolver<Mat> es(companion, false);
        for (int i = 0; i < m; ++i) {
            const std::complex<double> z = es.eigenvalues()[i];
            if (std::abs(z.imag()) > imag_tol * scale) {
                std::ostringstream msg;
                msg << "characteristic root " << z << " is not real at t = " << t;
                throw HypothesisViolation(msg.str());
            }
            roots.push_back(z.real());
        }
    } else {
        const auto& s = std::get<SystemSpec>(spec);
        const CMat a = s.symbol(t, xi);
        if (s.self_adjoint) {
            Eigen::SelfAdjointEigenSolver<CMat> es(a, Eigen::EigenvaluesOnly);
            for (int i = 0; i < s.m; ++i) roots.push_back(es.eigenvalues()[i]);
        } else {
            Eigen::ComplexEigenSolver<CMat> es(a, false);
            for (int i = 0; i < s.m; ++i) {
                const std::complex<double> z = es.eigenvalues()[i];
                if (std::abs(z.imag()) > imag_tol * scale) {
                    std::ostringstream msg;
                    msg << "system eigenvalue " << z << " is not real at t = " << t;
                    throw HypothesisViolation(msg.str());
                }
                roots.push_back(z.real());
            }
        }
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

double min_gap(const std::vector<double>& roots) {
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < roots.size(); ++i) g = std::min(g, roots[i] - roots[i - 1]);
    return g;
}

}  // namespace

std::vector<double> characteristic_roots(const EvolutionSpec& spec, double t, const Vec& xi, double imag_tol,
                                         double gap_tol) {
    check_xi(xi, spatial_dimension(spec));
    std::vector<double> roots = raw_roots(spec, t, xi, imag_tol);
    if (min_gap(roots) < gap_tol * xi.norm()) throw DistinctnessError("characteristic roots collide", t, to_std(xi));
    return roots;
}

HyperbolicityReport check_strict_hyperbolicity(const EvolutionSpec& spec, const std::vector<double>& t_grid,
                                               const std::vector<Vec>& directions, double gap_tol) {
    if (t_grid.empty() || directions.empty()) throw UsageError("hyperbolicity check needs nonempty grids");
    HyperbolicityReport report;
    report.c_gap = std::numeric_limits<double>::infinity();
    for (double t : t_grid)
        for (const Vec& d : directions) {
            const Vec dir = d / d.norm();
            const double g = min_gap(raw_roots(spec, t, dir, 1e-9));
            if (g < report.c_gap) {
                report.c_gap = g;
                report.witness_t = t;
                report.witness_xi = dir;
            }
        }
    if (report.c_gap <= gap_tol) {
        std::ostringstream msg;
        msg << "characteristic roots are not uniformly distinct: gap " << report.c_gap << " at t = " << report.witness_t;
        throw DistinctnessError(msg.str(), report.witness_t, to_std(report.witness_xi));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Time averages

namespace {

struct AverageRule {
    std::vector<double> nodes;
    std::vector<double> weights;  // already divided by t
};

// Panel rule on [0, t] refined until the average of f is stable.
AverageRule average_rule(const std::function<double(double)>& f, double t, double rel_tol) {
    int panels = std::max(8, static_cast<int>(std::ceil(t / 4.0)));
    auto estimate = [&](int p) { return integrate_panels(f, 0.0, t, p) / t; };
    double coarse = estimate(panels);
    for (;;) {
        const double fine = estimate(2 * panels);
        panels *= 2;
        if (std::abs(fine - coarse) <= rel_tol * std::abs(fine) + 1e-300) break;
        if (panels > (1 << 22)) throw AccuracyError("time average did not converge", coarse, fine);
        coarse = fine;
    }
    AverageRule rule;
    const GaussRule& gl = gauss_legendre(16);
    const double h = t / panels;
    for (int p = 0; p < panels; ++p)
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
            rule.nodes.push_back((p + 0.5) * h + 0.5 * h * gl.nodes[i]);
            rule.weights.push_back(0.5 * h * gl.weights[i] / t);
        }
    return rule;
}

double tracked_root(const EvolutionSpec& spec, int j, double theta, const Vec& xi) {
    std::vector<double> roots = raw_roots(spec, theta, xi, 1e-9);
    if (min_gap(roots) < 1e-9 * xi.norm()) {
        std::ostringstream msg;
        msg << "root order cannot be tracked: gap collapses at theta = " << theta;
        throw TrackingError(msg.str());
    }
    return roots[static_cast<std::size_t>(j)];
}

}  // namespace

double averaged_phase(const EvolutionSpec& spec, int j, double t, const Vec& xi, double rel_tol) {
    check_xi(xi, spatial_dimension(spec));
    if (j < 0 || j >= root_count(spec)) throw UsageError("root index out of range");
    if (!(t > 0.0)) throw DomainError("averaged phase needs t > 0");
    if (constant_in_time(spec)) return tracked_root(spec, j, 0.0, xi);
    auto f = [&](double theta) { return tracked_root(spec, j, theta, xi); };
    const AverageRule rule = average_rule(f, t, rel_tol);
    // Sorted order identifies branches only while no root moves by half the
    // smallest gap between consecutive nodes.
    double sum = 0.0;
    std::vector<double> previous;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        std::vector<double> roots = raw_roots(spec, rule.nodes[i], xi, 1e-9);
        const double gap = min_gap(roots);
        if (!previous.empty()) {
            const double limit = 0.5 * std::min(gap, min_gap(previous));
            for (std::size_t k = 0; k < roots.size(); ++k)
                if (std::abs(roots[k] - previous[k]) >= limit) {
                    std::ostringstream msg;
                    msg << "root order cannot be tracked near theta = " << rule.nodes[i];
                    throw TrackingError(msg.str());
                }
        }
        sum += rule.weights[i] * roots[static_cast<std::size_t>(j)];
        previous = std::move(roots);
    }
    return sum;
}

PhaseSpec fresnel_phase_at(const EvolutionSpec& spec, double t, std::optional<int> j) {
    if (!(t > 0.0)) throw DomainError("Fresnel surfaces of time-averaged phases need t > 0");
    const int n = spatial_dimension(spec);
    const int root = j.value_or(root_count(spec) - 1);
    if (root < 0 || root >= root_count(spec)) throw UsageError("root index out of range");
    std::ostringstream d;
    d << "time-averaged(root=" << root << ", t=" << t << ")";

    if (const auto* w = std::get_if<WaveModelSpec>(&spec)) {
        // Only the sign of the root matters for a wave model.
        const double sign = root == 0 ? -1.0 : 1.0;
        std::vector<Mat> mats;
        std::vector<double> weights;
        if (w->constant_coefficients()) {
            mats.push_back(w->matrix(0.0));
            weights.push_back(1.0);
        } else {
            // Resolve the rule on the coordinate axes and the diagonal.
            AverageRule best;
            std::vector<Vec> probes;
            for (int i = 0; i < n; ++i) probes.push_back(Vec::Unit(n, i));
            probes.push_back(Vec::Ones(n) / std::sqrt(static_cast<double>(n)));
            for (const Vec& xi : probes) {
                AverageRule r = average_rule([&](double th) { return std::sqrt(std::max(0.0, w->symbol(th, xi))); }, t, 1e-12);
                if (r.nodes.size() > best.nodes.size()) best = std::move(r);
            }
            for (double th : best.nodes) mats.push_back(w->matrix(th));
            weights = best.weights;
        }
        if (w->isotropic) {
            double speed = 0.0;
            for (std::size_t i = 0; i < mats.size(); ++i) speed += weights[i] * std::sqrt(mats[i](0, 0));
            const double c = sign * speed;
            return PhaseSpec::from_parts(
                PhaseKind::TimeAveraged, n, [c](double, const Vec&, const Vec& xi) { return c * xi.norm(); },
                [c](double, const Vec&, std::span<const Jet> xi) {
                    using std::sqrt;
                    Jet q = xi[0] * xi[0];
                    for (std::size_t i = 1; i < xi.size(); ++i) q += xi[i] * xi[i];
                    return c * sqrt(q);
                },
                false, false, d.str());
        }
        auto value = [mats, weights, sign](double, const Vec&, const Vec& xi) {
            double s = 0.0;
            for (std::size_t i = 0; i < mats.size(); ++i) s += weights[i] * std::sqrt(xi.dot(mats[i] * xi));
            return sign * s;
        };
        auto jet = [mats, weights, sign](double, const Vec&, std::span<const Jet> xi) {
            using std::sqrt;
            Jet s(xi[0].layout(), 0.0);
            const auto n_ = static_cast<Eigen::Index>(xi.size());
            for (std::size_t k = 0; k < mats.size(); ++k) {
                Jet q(xi[0].layout(), 0.0);
                for (Eigen::Index a = 0; a < n_; ++a)
                    for (Eigen::Index b = 0; b < n_; ++b)
                        if (mats[k](a, b) != 0.0)
                            q += mats[k](a, b) * (xi[static_cast<std::size_t>(a)] * xi[static_cast<std::size_t>(b)]);
                s += weights[k] * sqrt(q);
            }
            return sign * s;
        };
        return PhaseSpec::from_parts(PhaseKind::TimeAveraged, n, value, jet, false, false, d.str());
    }

    auto value = [spec, root, t](double, const Vec&, const Vec& xi) { return averaged_phase(spec, root, t, xi, 1e-12); };
    PhaseSpec p = PhaseSpec::from_parts(PhaseKind::TimeAveraged, n, value, nullptr, false, false, d.str());
    return p;
}

HhReport check_hh_condition(const EvolutionSpec& spec, double t_max, const std::vector<Vec>& directions) {
    if (!(t_max > 0.0) || directions.empty()) throw UsageError("hh check needs t_max > 0 and directions");
    HhReport report;
    report.witness_direction = directions.front();
    if (constant_in_time(spec)) {
        for (const Vec& d : directions) characteristic_roots(spec, 0.0, d / d.norm());
        return report;
    }
    const int m = root_count(spec);
    const GaussRule& gl = gauss_legendre(16);
    const double width = 0.05;
    const int panels = static_cast<int>(std::ceil(t_max / width));
    const double h = t_max / panels;
    for (const Vec& d : directions) {
        const Vec xi = d / d.norm();
        std::vector<double> running(static_cast<std::size_t>(m), 0.0);
        for (int p = 0; p < panels; ++p) {
            const double mid = (p + 0.5) * h;
            std::vector<double> panel(static_cast<std::size_t>(m), 0.0);
            for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
                const double theta = mid + 0.5 * h * gl.nodes[q];
                const double step = 1e-4 * (1.0 + theta);
                const std::vector<double> roots = characteristic_roots(spec, theta, xi);
                const std::vector<double> plus = characteristic_roots(spec, theta + step, xi);
                const std::vector<double> minus = characteristic_roots(spec, theta - step, xi);
                for (int j = 0; j < m; ++j) {
                    const double dtau = (plus[static_cast<std::size_t>(j)] - minus[static_cast<std::size_t>(j)]) / (2.0 * step);
                    double sum = 0.0;
                    for (int k = 0; k < m; ++k)
                        if (k != j) sum += dtau / (roots[static_cast<std::size_t>(j)] - roots[static_cast<std::size_t>(k)]);
                    panel[static_cast<std::size_t>(j)] += 0.5 * h * gl.weights[q] * sum;
                }
            }
            for (int j = 0; j < m; ++j) {
                running[static_cast<std::size_t>(j)] += panel[static_cast<std::size_t>(j)];
                const double v = std::abs(running[static_cast<std::size_t>(j)]);
                if (v > report.sup) {
                    report.sup = v;
                    report.witness_t = (p + 1) * h;
                    report.witness_root = j;
                    report.witness_direction = xi;
                }
            }
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Per-frequency evolution

namespace {

// Linear ODE Y' = M_g(t) Y_g for a batch of frequency groups, Y_g complex m x m.
class ModeSystem {
public:
    ModeSystem(const EvolutionSpec& spec, std::vector<Vec> xis) : spec_(spec), xis_(std::move(xis)) {
        m_ = root_count(spec);
        if (std::holds_alternative<WaveModelSpec>(spec_)) {
            for (const Vec& xi : xis_) outer_.push_back(xi * xi.transpose());
        } else if (const auto* h = std::get_if<HigherOrderSpec>(&spec_)) {
            for (const Vec& xi : xis_) {
                std::vector<double> mono;
                for (const auto& term : h->terms) mono.push_back(monomial(xi, term.alpha, h->m - term.k));
                monomials_.push_back(std::move(mono));
            }
        } else {
            const auto& s = std::get<SystemSpec>(spec_);
            if (s.constant_in_t)
                for (const Vec& xi : xis_) constant_symbols_.push_back(s.symbol(0.0, xi));
        }
    }

    std::size_t state_size() const { return xis_.size() * static_cast<std::size_t>(2 * m_ * m_); }
    int m() const { return m_; }

    State initial() const {
        State y(state_size(), 0.0);
        for (std::size_t g = 0; g < xis_.size(); ++g) {
            auto* z = reinterpret_cast<cplx*>(y.data()) + g * static_cast<std::size_t>(m_ * m_);
            for (int i = 0; i < m_; ++i) z[i * m_ + i] = 1.0;  // column-major identity
        }
        return y;
    }

    void operator()(const State& y, State& dy, double t) const {
        const std::size_t block = static_cast<std::size_t>(m_ * m_);
        const auto* zin = reinterpret_cast<const cplx*>(y.data());
        auto* zout = reinterpret_cast<cplx*>(dy.data());
        CMat mat(m_, m_);
        if (const auto* w = std::get_if<WaveModelSpec>(&spec_)) {
            const Mat a = w->matrix(t);
            for (std::size_t g = 0; g < xis_.size(); ++g) {
                const double sym = (a.array() * outer_[g].array()).sum();
                const cplx* Y = zin + g * block;
                cplx* D = zout + g * block;
                for (int c = 0; c < 2; ++c) {
                    D[c * 2 + 0] = Y[c * 2 + 1];
                    D[c * 2 + 1] = -sym * Y[c * 2 + 0];
                }
            }
            return;
        }
        if (const auto* h = std::get_if<HigherOrderSpec>(&spec_)) {
            std::vector<double> coeff;
            for (const auto& term : h->terms) coeff.push_back(term.coefficient(t));
            // v^(m) = -sum_k c_k i^(m-k) v^(k).
            std::vector<cplx> ipow(static_cast<std::size_t>(m_) + 1);
            ipow[0] = 1.0;
            for (int k = 1; k <= m_; ++k) ipow[static_cast<std::size_t>(k)] = ipow[static_cast<std::size_t>(k) - 1] * cplx(0.0, 1.0);
            std::vector<cplx> row(static_cast<std::size_t>(m_));
            for (std::size_t g = 0; g < xis_.size(); ++g) {
                std::fill(row.begin(), row.end(), cplx(0.0, 0.0));
                for (std::size_t q = 0; q < h->terms.size(); ++q) {
                    const int k = h->terms[q].k;
                    row[static_cast<std::size_t>(k)] -= coeff[q] * monomials_[g][q] * ipow[static_cast<std::size_t>(m_ - k)];
                }
                const cplx* Y = zin + g * block;
                cplx* D = zout + g * block;
                for (int c = 0; c < m_; ++c) {
                    for (int r = 0; r + 1 < m_; ++r) D[c * m_ + r] = Y[c * m_ + r + 1];
                    cplx top = 0.0;
                    for (int k = 0; k < m_; ++k) top += row[static_cast<std::size_t>(k)] * Y[c * m_ + k];
                    D[c * m_ + m_ - 1] = top;
                }
            }
            return;
        }
        const auto& s = std::get<SystemSpec>(spec_);
        for (std::size_t g = 0; g < xis_.size(); ++g) {
            const CMat a = s.constant_in_t ? constant_symbols_[g] : s.symbol(t, xis_[g]);
            Eigen::Map<const CMat> Y(zin + g * block, m_, m_);
            Eigen::Map<CMat> D(zout + g * block, m_, m_);
            D.noalias() = cplx(0.0, 1.0) * (a * Y);
        }
    }

    CMat block(const State& y, std::size_t g) const {
        const auto* z = reinterpret_cast<const cplx*>(y.data()) + g * static_cast<std::size_t>(m_ * m_);
        return Eigen::Map<const CMat>(z, m_, m_);
    }

    const Vec& xi(std::size_t g) const { return xis_[g]; }

private:
    const EvolutionSpec& spec_;
    std::vector<Vec> xis_;
    int m_ = 2;
    std::vector<Mat> outer_;
    std::vector<std::vector<double>> monomials_;
    std::vector<CMat> constant_symbols_;
};

void check_times(const std::vector<double>& t_list) {
    if (t_list.empty()) throw UsageError("time list is empty");
    for (std::size_t i = 0; i < t_list.size(); ++i) {
        if (t_list[i] < 0.0) throw UsageError("times must be non-negative");
        if (i > 0 && t_list[i] < t_list[i - 1]) throw UsageError("times must be nondecreasing");
    }
}

// Integrates `system` from 0 through t_list; observer(i, y) at each requested time.
template <class System, class Observer>
void integrate_to(const System& system, State y, const std::vector<double>& t_list, const EvolveOptions& options,
                  Observer&& observer, const Vec& witness) {
    std::vector<double> times;
    times.push_back(0.0);
    times.insert(times.end(), t_list.begin(), t_list.end());
    std::size_t seen = 0;
    auto obs = [&](const State& s, double) {
        if (seen > 0) observer(seen - 1, s);
        ++seen;
    };
    try {
        auto stepper = odeint::make_dense_output(options.abs_tol, options.rel_tol, odeint::runge_kutta_dopri5<State>());
        odeint::integrate_times(stepper, system, y, times.begin(), times.end(), 1e-3, obs,
                                odeint::max_step_checker(50'000'000));
    } catch (const std::exception& e) {
        std::ostringstream msg;
        msg << "ODE integration failed near xi = (" << witness.transpose() << "): " << e.what();
        throw IntegrationError(msg.str());
    }
    if (seen != times.size()) throw IntegrationError("ODE integration stopped before the last requested time");
}

}  // namespace

std::vector<CMat> mode_propagator(const EvolutionSpec& spec, const Vec& xi, const std::vector<double>& t_list,
                                  const EvolveOptions& options) {
    check_times(t_list);
    check_xi(xi, spatial_dimension(spec));
    ModeSystem system(spec, {xi});
    std::vector<CMat> out(t_list.size());
    integrate_to(system, system.initial(), t_list, options,
                 [&](std::size_t i, const State& y) { out[i] = system.block(y, 0); }, xi);
    return out;
}

EvolutionResult evolve(const EvolutionSpec& spec, const CauchyData& data, const std::vector<double>& t_list,
                       const EvolveOptions& options) {
    check_times(t_list);
    const int m = root_count(spec);
    const int n = spatial_dimension(spec);
    const bool is_system = std::holds_alternative<SystemSpec>(spec);
    if (static_cast<int>(data.fields.size()) != m) throw UsageError("Cauchy data must have one field per root");
    const GriddedField& ref = data.fields.front();
    for (const auto& f : data.fields)
        if (f.dimension() != n || f.points() != ref.points() || f.extent() != ref.extent())
            throw UsageError("Cauchy data fields must share the model's grid");

    std::vector<std::vector<cplx>> spectra;
    for (const auto& f : data.fields) spectra.push_back(forward_transform(f));
    const std::size_t size = ref.size();
    double peak = 0.0;
    for (const auto& s : spectra)
        for (const cplx& v : s) peak = std::max(peak, std::abs(v));

    // Group frequencies that share the same ODE.
    bool by_radius = false;
    if (const auto* w = std::get_if<WaveModelSpec>(&spec)) by_radius = w->isotropic;
    if (const auto* h = std::get_if<HigherOrderSpec>(&spec))
        by_radius = std::all_of(h->terms.begin(), h->terms.end(), [](const auto& term) { return term.alpha.empty(); });
    if (const auto* s = std::get_if<SystemSpec>(&spec)) by_radius = s->radial;
    const bool even = std::holds_alternative<WaveModelSpec>(spec);

    std::map<std::vector<long long>, std::size_t> group_of;
    std::vector<Vec> group_xi;
    std::vector<long> member_group(size, -1);
    const int points = ref.points();
    for (std::size_t i = 0; i < size; ++i) {
        bool active = false;
        for (const auto& s : spectra) active = active || std::abs(s[i]) > options.spectrum_floor * peak;
        if (!active || peak == 0.0) continue;
        std::vector<long long> k(static_cast<std::size_t>(n));
        std::size_t rest = i;
        for (int d = n - 1; d >= 0; --d) {
            const int j = static_cast<int>(rest % static_cast<std::size_t>(points));
            rest /= static_cast<std::size_t>(points);
            k[static_cast<std::size_t>(d)] = j < points / 2 ? j : j - points;
        }
        std::vector<long long> key;
        if (by_radius) {
            long long r2 = 0;
            for (long long v : k) r2 += v * v;
            key = {r2};
        } else {
            key = k;
            if (even) {
                auto first = std::find_if(key.begin(), key.end(), [](long long v) { return v != 0; });
                if (first != key.end() && *first < 0)
                    for (auto& v : key) v = -v;
            }
        }
        auto [it, inserted] = group_of.emplace(key, group_xi.size());
        if (inserted) group_xi.push_back(ref.frequency(i));
        member_group[i] = static_cast<long>(it->second);
    }

    // Propagators per group and time: chunks of groups integrated in parallel.
    const std::size_t groups = group_xi.size();
    std::vector<std::vector<CMat>> prop(t_list.size(), std::vector<CMat>(groups));
    // Fixed chunk size so results do not depend on the worker count.
    const std::size_t chunks = (groups + kModeChunk - 1) / kModeChunk;
    parallel_for(chunks, [&](std::size_t c) {
        const std::size_t lo = groups * c / chunks, hi = groups * (c + 1) / chunks;
        if (lo == hi) return;
        std::vector<Vec> xis(group_xi.begin() + static_cast<long>(lo), group_xi.begin() + static_cast<long>(hi));
        Vec witness = xis.front();
        for (const Vec& v : xis)
            if (v.norm() > witness.norm()) witness = v;
        ModeSystem system(spec, xis);
        integrate_to(system, system.initial(), t_list, options,
                     [&](std::size_t ti, const State& y) {
                         for (std::size_t g = lo; g < hi; ++g) prop[ti][g] = system.block(y, g - lo);
                     },
                     witness);
    });

    EvolutionResult result;
    result.times = t_list;
    result.ode_solves = groups;
    const double scale = std::pow(ref.extent(), -n);
    const auto* wave = std::get_if<WaveModelSpec>(&spec);
    for (std::size_t ti = 0; ti < t_list.size(); ++ti) {
        const int comps = is_system ? m : 1;
        std::vector<std::vector<cplx>> out(static_cast<std::size_t>(comps), std::vector<cplx>(size, cplx(0.0, 0.0)));
        double energy = 0.0;
        const Mat a_t = wave ? wave->matrix(t_list[ti]) : Mat();
        Eigen::VectorXcd d(m);
        for (std::size_t i = 0; i < size; ++i) {
            if (member_group[i] < 0) continue;
            for (int c = 0; c < m; ++c) d[c] = spectra[static_cast<std::size_t>(c)][i];
            const Eigen::VectorXcd state = prop[ti][static_cast<std::size_t>(member_group[i])] * d;
            for (int c = 0; c < comps; ++c) out[static_cast<std::size_t>(c)][i] = state[c];
            if (wave) {
                const Vec xi = ref.frequency(i);
                energy += std::norm(state[1]) + xi.dot(a_t * xi) * std::norm(state[0]);
            } else {
                energy += state.squaredNorm();
            }
        }
        result.energies.push_back(energy * scale);
        std::vector<GriddedField> fields;
        double sup = 0.0, l2sq = 0.0;
        for (int c = 0; c < comps; ++c) {
            fields.push_back(inverse_transform(out[static_cast<std::size_t>(c)], n, ref.extent(), ref.points()));
            sup = std::max(sup, fields.back().sup_norm());
            l2sq += std::pow(fields.back().l2_norm(), 2);
        }
        result.sup_norms.push_back(sup);
        result.l2_norms.push_back(std::sqrt(l2sq));
        result.fields.push_back(std::move(fields));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Radial wave evolution

double bessel_j0(double z) {
    z = std::abs(z);
    if (z < 25.0) return std::cyl_bessel_j(0.0, z);
    // Hankel asymptotic expansion: a_k = prod_{j<=k} (-(2j-1)^2) / (k! 8^k).
    static const std::vector<double> a = [] {
        std::vector<double> c(16);
        c[0] = 1.0;
        for (int k = 1; k < 16; ++k) c[static_cast<std::size_t>(k)] = c[static_cast<std::size_t>(k) - 1] * -((2.0 * k - 1) * (2.0 * k - 1)) / (8.0 * k);
        return c;
    }();
    const double inv = 1.0 / z;
    double p = 0.0, q = 0.0, zk = 1.0;
    for (int k = 0; k < 16; ++k) {
        const double term = a[static_cast<std::size_t>(k)] * zk;
        const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
        if (k % 2 == 0) p += sign * term;
        else q += sign * term;
        zk *= inv;
    }
    const double w = z - M_PI / 4.0;
    return std::sqrt(2.0 / (M_PI * z)) * (p * std::cos(w) - q * std::sin(w));
}

namespace {

struct RadialSystem {
    const WaveModelSpec* spec;
    const std::vector<double>* s2;
    void operator()(const State& y, State& dy, double t) const {
        const double a = (*spec).a[0][0](t);
        const std::size_t count = s2->size();
        for (std::size_t k = 0; k < count; ++k) {
            dy[2 * k] = y[2 * k + 1];
            dy[2 * k + 1] = -a * (*s2)[k] * y[2 * k];
        }
    }
};

}  // namespace

RadialWaveEvolution::RadialWaveEvolution(WaveModelSpec spec, AnnulusProfile profile, std::vector<double> t_list,
                                         const EvolveOptions& options)
    : spec_(std::move(spec)), profile_(profile), times_(std::move(t_list)) {
    if (!spec_.isotropic || spec_.n != 2) throw CapabilityError("radial evolution needs an isotropic wave model in n = 2");
    check_times(times_);
    auto speed = [this](double th) {
        const double a = spec_.a[0][0](th);
        if (!(a > 0.0)) throw HypothesisViolation("wave coefficient is not positive");
        return std::sqrt(a);
    };
    for (double t : times_) {
        fronts_.push_back(t == 0.0 ? 0.0 : integrate_panels(speed, 0.0, t, std::max(8, static_cast<int>(std::ceil(t)))));
    }
    const double lo = std::max(0.0, profile_.center - 8.0 * profile_.width);
    const double hi = profile_.center + 8.0 * profile_.width;
    // Integrand oscillates in s at rate up to about 2 * front + band.
    const double band = 12.0 / profile_.width;
    const double rate = 2.0 * fronts_.back() + 2.0 * band;
    const int panels = 16 + static_cast<int>(std::ceil(rate * (hi - lo) / (2.0 * M_PI)));
    const GaussRule& gl = gauss_legendre(16);
    const double h = (hi - lo) / panels;
    std::vector<double> s2;
    for (int p = 0; p < panels; ++p)
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
            const double s = lo + (p + 0.5) * h + 0.5 * h * gl.nodes[i];
            s_.push_back(s);
            s2.push_back(s * s);
            weights_.push_back(0.5 * h * gl.weights[i] * profile_(s) * s / (2.0 * M_PI));
        }
    v_.assign(times_.size(), std::vector<double>(s_.size()));
    const std::size_t count = s_.size();
    const std::size_t chunks = (count + kRadialChunk - 1) / kRadialChunk;
    parallel_for(chunks, [&](std::size_t c) {
        const std::size_t a = count * c / chunks, b = count * (c + 1) / chunks;
        std::vector<double> part(s2.begin() + static_cast<long>(a), s2.begin() + static_cast<long>(b));
        State y(2 * part.size(), 0.0);
        for (std::size_t k = 0; k < part.size(); ++k) y[2 * k] = 1.0;
        RadialSystem system{&spec_, &part};
        Vec witness(2);
        witness << std::sqrt(part.back()), 0.0;
        integrate_to(system, y, times_, options,
                     [&](std::size_t ti, const State& st) {
                         for (std::size_t k = 0; k < part.size(); ++k) v_[ti][a + k] = st[2 * k];
                     },
                     witness);
    });
}

cplx RadialWaveEvolution::value(std::size_t i, double r) const {
    const std::vector<double>& v = v_.at(i);
    double sum = 0.0;
    for (std::size_t k = 0; k < s_.size(); ++k) sum += weights_[k] * v[k] * bessel_j0(s_[k] * r);
    return {sum, 0.0};
}

double RadialWaveEvolution::sup_norm(std::size_t i) const {
    const double t = times_.at(i);
    double vmax = 0.0;
    const int grid = 400;
    for (int q = 0; q <= grid; ++q) vmax = std::max(vmax, std::sqrt(spec_.a[0][0](t * q / grid)));
    const double r_max = std::max(1.5 * t * vmax, fronts_[i] + 20.0 / profile_.width);
    const double s_max = profile_.center + 4.0 * profile_.width;
    const double fine = M_PI / (4.0 * s_max);
    const double band = 10.0 / profile_.width;
    std::vector<double> rs;
    for (double r = 0.0; r <= r_max; r += 4.0 * fine) rs.push_back(r);
    for (double r = std::max(0.0, fronts_[i] - band); r <= fronts_[i] + band; r += fine) rs.push_back(r);
    std::vector<double> vals(rs.size());
    parallel_for(rs.size(), [&](std::size_t k) { vals[k] = std::abs(value(i, rs[k])); });
    // Local refinement around the three largest samples.
    std::vector<std::size_t> order(rs.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    const std::size_t top = std::min<std::size_t>(3, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<long>(top), order.end(),
                      [&](std::size_t a, std::size_t b) { return vals[a] > vals[b]; });
    double best = vals[order[0]];
    for (std::size_t q = 0; q < top; ++q) {
        double a = std::max(0.0, rs[order[q]] - fine), b = rs[order[q]] + fine;
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double c = b - g * (b - a), d = a + g * (b - a);
        double fc = std::abs(value(i, c)), fd = std::abs(value(i, d));
        for (int it = 0; it < 40; ++it) {
            if (fc > fd) {
                b = d; d = c; fd = fc;
                c = b - g * (b - a);
                fc = std::abs(value(i, c));
            } else {
                a = c; c = d; fc = fd;
                d = a + g * (b - a);
                fd = std::abs(value(i, d));
            }
        }
        best = std::max({best, fc, fd});
    }
    return best;
}

}  // namespace fresnel
