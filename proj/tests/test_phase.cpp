#include <doctest.h>

#include <cmath>
#include <random>

#include "fresnel/errors.hpp"
#include "fresnel/phase.hpp"

using namespace fresnel;

namespace {

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

std::vector<PhaseSpec> builtins() {
    return {PhaseSpec::euclidean(2), PhaseSpec::euclidean(3, 2.0), PhaseSpec::anisotropic_power(2, 4),
            PhaseSpec::anisotropic_power(3, 6), PhaseSpec::star(0.3, 3)};
}

// Bisection on r -> phi(r theta) - 1, independent of the homogeneity shortcut.
double bisect_radius(const PhaseSpec& p, const Vec& theta) {
    double lo = 1e-3, hi = 1e3;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (eval_phase(p, 0, Vec::Zero(p.dimension()), Vec(mid * theta)) > 1.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("eval_phase on builtins") {
    const Vec x = Vec::Zero(2);
    CHECK(eval_phase(PhaseSpec::euclidean(2), 0, x, v2(3, 4)) == doctest::Approx(5.0));
    const auto quartic = PhaseSpec::anisotropic_power(2, 4);
    CHECK(eval_phase(quartic, 0, x, v2(1, 0)) == doctest::Approx(1.0));
    CHECK(eval_phase(quartic, 0, x, v2(1, 1)) == doctest::Approx(1.189207115002721).epsilon(1e-12));
    // Cross-check: the unit level set along (1,1)/sqrt2 sits at radius 1/phi(theta).
    const Vec th = v2(1, 1) / std::sqrt(2.0);
    CHECK(bisect_radius(quartic, th) == doctest::Approx(1.0 / eval_phase(quartic, 0, x, th)).epsilon(1e-12));
    CHECK_THROWS_AS(eval_phase(quartic, 0, x, v2(0, 0)), DomainError);
}

TEST_CASE("eval_phase_deriv examples") {
    const Vec x = Vec::Zero(2);
    const int a02[2] = {0, 2}, a20[2] = {2, 0};
    const auto euc = PhaseSpec::euclidean(2);
    CHECK(eval_phase_deriv(euc, 0, x, v2(1, 0), a02).value == doctest::Approx(1.0));
    CHECK(eval_phase_deriv(euc, 0, x, v2(1, 0), a20).value == doctest::Approx(0.0));
    const auto quartic = PhaseSpec::anisotropic_power(2, 4);
    CHECK(std::abs(eval_phase_deriv(quartic, 0, x, v2(0, 1), a20).value) < 1e-14);
    // Richardson oracle at steps 1e-3 and 5e-4 on the raw value.
    auto d2 = [&](double h) {
        return (quartic(0, x, v2(h, 1)) - 2 * quartic(0, x, v2(0, 1)) + quartic(0, x, v2(-h, 1))) / (h * h);
    };
    const double oracle = (4 * d2(5e-4) - d2(1e-3)) / 3;
    CHECK(std::abs(oracle) < 1e-6);
    const auto fd = quartic.with_finite_differences();
    CHECK(std::abs(eval_phase_deriv(fd, 0, x, v2(0, 1), a20).value) < 1e-6);
    const int a7[2] = {7, 0};
    CHECK_THROWS_AS(eval_phase_deriv(fd, 0, x, v2(0, 1), a7), CapabilityError);
    CHECK_THROWS_AS(eval_phase_deriv(quartic, 0, x, v2(0, 0), a20), DomainError);
}

TEST_CASE("check_homogeneity") {
    CHECK(check_homogeneity(PhaseSpec::euclidean(2), 100).max_relative_deviation <= 1e-14);
    CHECK(check_homogeneity(PhaseSpec::star(0.3, 3), 100).max_relative_deviation <= 1e-12);
    const auto squared = PhaseSpec::user_table(2, [](double, const Vec&, const Vec& xi) { return xi.squaredNorm(); });
    CHECK(check_homogeneity(squared, 100).max_relative_deviation >= 0.5);
}

TEST_CASE("phase_bounds on builtins") {
    const auto dirs = direction_grid(2, 1.0);
    const std::vector<double> t{0.0};
    const std::vector<Vec> x{Vec::Zero(2)};
    auto b = phase_bounds(PhaseSpec::euclidean(2), dirs, t, x);
    CHECK(b.lower == doctest::Approx(1.0));
    CHECK(b.upper == doctest::Approx(1.0));
    b = phase_bounds(PhaseSpec::anisotropic_power(2, 4), dirs, t, x);
    CHECK(b.lower == doctest::Approx(std::pow(0.5, 0.25)).epsilon(1e-12));
    CHECK(b.upper == doctest::Approx(1.0));
    b = phase_bounds(PhaseSpec::star(0.3, 3), dirs, t, x);
    CHECK(b.lower == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(b.upper == doctest::Approx(1.3).epsilon(1e-12));
    const auto bad = PhaseSpec::user_table(2, [](double, const Vec&, const Vec& xi) { return xi[0]; });
    CHECK_THROWS_AS(phase_bounds(bad, dirs, t, x), HypothesisViolation);
}

TEST_CASE("Euler identity and derivative homogeneity on builtins") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal;
    for (const auto& p : builtins()) {
        const int n = p.dimension();
        const Vec x = Vec::Zero(n);
        for (int s = 0; s < 20; ++s) {
            Vec xi(n);
            for (int i = 0; i < n; ++i) xi[i] = normal(rng);
            const double phi = eval_phase(p, 0, x, xi);
            CHECK(std::abs(xi.dot(phase_gradient(p, 0, x, xi)) - phi) <= 1e-8 * phi);
            const auto fd = p.with_finite_differences();
            CHECK(std::abs(xi.dot(phase_gradient(fd, 0, x, xi)) - phi) <= 1e-5 * phi);
            auto layout = JetLayout::get(n, 3);
            for (double lambda : {0.5, 3.0}) {
                for (std::size_t idx = 1; idx < layout->size(); ++idx) {
                    const auto alpha = layout->exponents(idx);
                    const int k = layout->degree(idx);
                    const double base = eval_phase_deriv(p, 0, x, xi, alpha).value;
                    const double scaled = eval_phase_deriv(p, 0, x, Vec(lambda * xi), alpha).value;
                    CHECK(scaled == doctest::Approx(std::pow(lambda, 1 - k) * base).epsilon(1e-9).scale(
                                        std::pow(xi.norm(), 1 - k)));
                }
            }
        }
    }
}

TEST_CASE("finite differences agree with jets within the reported error") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal;
    for (const auto& p : builtins()) {
        const int n = p.dimension();
        const Vec x = Vec::Zero(n);
        const auto fd = p.with_finite_differences();
        auto layout = JetLayout::get(n, 4);
        for (int s = 0; s < 5; ++s) {
            Vec xi(n);
            for (int i = 0; i < n; ++i) xi[i] = normal(rng);
            for (std::size_t idx = 1; idx < layout->size(); ++idx) {
                const auto alpha = layout->exponents(idx);
                const double exact = eval_phase_deriv(p, 0, x, xi, alpha).value;
                const auto approx = eval_phase_deriv(fd, 0, x, xi, alpha);
                CHECK(std::abs(exact - approx.value) <= approx.error_estimate + 1e-12);
            }
        }
    }
}

TEST_CASE("expression phase matches the builtin it spells out") {
    const auto e = PhaseSpec::expression(2, "(xi1^4 + xi2^4)^(1/4)");
    const auto q = PhaseSpec::anisotropic_power(2, 4);
    const Vec x = Vec::Zero(2);
    const int a31[2] = {3, 1};
    CHECK(eval_phase(e, 0, x, v2(0.3, -1.1)) == doctest::Approx(eval_phase(q, 0, x, v2(0.3, -1.1))));
    CHECK(eval_phase_deriv(e, 0, x, v2(0.3, -1.1), a31).value ==
          doctest::Approx(eval_phase_deriv(q, 0, x, v2(0.3, -1.1), a31).value));
    CHECK_FALSE(e.depends_on_x());
    CHECK(PhaseSpec::expression(2, "norm(xi1, xi2) * (1 + 0.1 * sin(x1))").depends_on_x());
}

TEST_CASE("check_symbol_class examples") {
    SymbolClassSpec spec;
    spec.kind = SymbolClassKind::T;
    spec.ell = 0.0;
    spec.max_order = 3;
    spec.t_grid = SymbolClassSpec::default_t_grid(1e4);

    const auto slow = TimeFunction::expression("2 + sin(log(e + t))");
    auto r = check_symbol_class(slow, spec);
    CHECK(r.member);
    // |f'| <t> = |cos(log(e+t))| <t> / (e+t) approaches 1 where log(e+t) = 2 pi.
    CHECK(r.constants[1] == doctest::Approx(1.0).epsilon(0.01));

    spec.max_order = 1;
    const auto fast = TimeFunction::expression("2 + sin(t)");
    r = check_symbol_class(fast, spec);
    CHECK_FALSE(r.member);
    CHECK(r.constants[1] > 9e3);
    CHECK(r.growth[1] >= 1e3);

    for (double ell : {0.0, 1.0, 2.5}) {
        spec.ell = ell;
        spec.max_order = 3;
        r = check_symbol_class(TimeFunction::constant(4.0), spec);
        CHECK(r.member);
        for (int k = 1; k <= 3; ++k) CHECK(r.constants[static_cast<std::size_t>(k)] == 0.0);
    }
    const auto nan = TimeFunction::callable([](double t) { return t > 5 ? std::nan("") : 1.0; });
    CHECK_THROWS_AS(check_symbol_class(nan, spec), DataError);
}

TEST_CASE("class membership is monotone in the order") {
    SymbolClassSpec spec;
    spec.max_order = 2;
    spec.t_grid = SymbolClassSpec::default_t_grid(1e3);
    for (const char* src : {"2 + sin(t)", "1 + t", "(1 + t)^2", "2 + sin(log(e + t))", "exp(-t) + (1 + t)^0.5"}) {
        const auto f = TimeFunction::expression(src);
        bool previous = false;
        for (double ell = -1.0; ell <= 3.0; ell += 0.5) {
            spec.ell = ell;
            const bool member = check_symbol_class(f, spec).member;
            if (previous) CHECK_MESSAGE(member, src << " at ell=" << ell);
            previous = member;
        }
    }
}

TEST_CASE("callable time functions use finite differences") {
    const auto f = TimeFunction::callable([](double t) { return std::sin(t); });
    const auto d = f.derivatives(2.0, 3);
    CHECK(d[1] == doctest::Approx(std::cos(2.0)).epsilon(1e-8));
    CHECK(d[2] == doctest::Approx(-std::sin(2.0)).epsilon(1e-6));
    CHECK(d[3] == doctest::Approx(-std::cos(2.0)).epsilon(1e-4));
}

TEST_CASE("S{m1, m2} symbol check") {
    SymbolClassSpec spec;
    spec.kind = SymbolClassKind::S;
    spec.m1 = 1.0;
    spec.m2 = 0.0;
    spec.max_order = 2;
    spec.max_xi_order = 2;
    spec.t_grid = SymbolClassSpec::default_t_grid(1e3);
    for (const Vec& th : direction_grid(2, 30.0)) spec.xi_grid.push_back(th), spec.xi_grid.push_back(3.0 * th);
    const Expr good = Expr::parse("(2 + sin(log(e + t))) * norm(xi1, xi2)", {"t", "xi1", "xi2"});
    CHECK(check_symbol_class(good, 2, spec).member);
    const Expr bad = Expr::parse("(2 + sin(t)) * norm(xi1, xi2)", {"t", "xi1", "xi2"});
    CHECK_FALSE(check_symbol_class(bad, 2, spec).member);
}

TEST_CASE("amplitude cutoff and symbol estimate") {
    const auto a = AmplitudeSpec::constant(0.7).with_cutoff(2.0);
    const Vec x = Vec::Zero(2);
    CHECK(a(1.0, x, v2(1.0, 0)) == 0.0);
    CHECK(a(1.0, x, v2(5.0, 0)) == doctest::Approx(0.7));
    CHECK(a(1.0, x, v2(3.0, 0)) == doctest::Approx(0.35));
    const auto rep = check_symbol_estimate(AmplitudeSpec::expression(2, "1 / (1 + xi1^2 + xi2^2)"), 3,
                                           direction_grid(2, 10.0), {0.1, 1.0, 10.0, 100.0}, 0.0, x);
    CHECK(rep.satisfied);
    for (double c : rep.constants) CHECK(c < 10.0);
}
