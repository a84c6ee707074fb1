#include <doctest.h>

#include <cmath>

#include "fresnel/errors.hpp"
#include "fresnel/expr.hpp"
#include "fresnel/jet.hpp"
#include "fresnel/quadrature.hpp"

using namespace fresnel;

TEST_CASE("univariate jet reproduces Taylor coefficients of exp and sin") {
    auto layout = JetLayout::get(1, 6);
    const Jet x = Jet::variable(layout, 0, 0.3);
    const Jet e = exp(x);
    const Jet s = sin(x);
    double fact = 1.0;
    for (int k = 0; k <= 6; ++k) {
        if (k > 0) fact *= k;
        const int alpha[1] = {k};
        CHECK(e.derivative(alpha) == doctest::Approx(std::exp(0.3)).epsilon(1e-14));
        const double ds[4] = {std::sin(0.3), std::cos(0.3), -std::sin(0.3), -std::cos(0.3)};
        CHECK(s.derivative(alpha) == doctest::Approx(ds[k % 4]).epsilon(1e-13));
    }
}

TEST_CASE("bivariate mixed partials of a product") {
    // f = x^2 y^3 at (1.5, -0.5): d^2/dx dy = 2x * 3y^2
    auto layout = JetLayout::get(2, 5);
    const Jet x = Jet::variable(layout, 0, 1.5), y = Jet::variable(layout, 1, -0.5);
    const Jet f = ipow(x, 2) * ipow(y, 3);
    const int a11[2] = {1, 1}, a23[2] = {2, 3}, a05[2] = {0, 5};
    CHECK(f.derivative(a11) == doctest::Approx(2 * 1.5 * 3 * 0.25));
    CHECK(f.derivative(a23) == doctest::Approx(2.0 * 6.0));
    CHECK(f.derivative(a05) == doctest::Approx(0.0));
}

TEST_CASE("sqrt, log, pow and division agree with closed forms") {
    auto layout = JetLayout::get(1, 4);
    const Jet x = Jet::variable(layout, 0, 2.0);
    const int a3[1] = {3};
    // (sqrt x)''' = 3/8 x^{-5/2}
    CHECK(sqrt(x).derivative(a3) == doctest::Approx(0.375 * std::pow(2.0, -2.5)));
    // (log x)''' = 2 / x^3
    CHECK(log(x).derivative(a3) == doctest::Approx(0.25));
    // (x^0.25)''' = 0.25 * -0.75 * -1.75 x^{-2.75}
    CHECK(pow(x, 0.25).derivative(a3) == doctest::Approx(0.25 * -0.75 * -1.75 * std::pow(2.0, -2.75)));
    // (1/x)''' = -6 / x^4
    CHECK((1.0 / x).derivative(a3) == doctest::Approx(-6.0 / 16.0));
}

TEST_CASE("expression parser evaluates and differentiates") {
    const Expr e = Expr::parse("2 + sin(log(e + t))", {"t"});
    const double t0[1] = {3.0};
    CHECK(e(std::span<const double>(t0, 1)) == doctest::Approx(2.0 + std::sin(std::log(M_E + 3.0))));
    auto layout = JetLayout::get(1, 1);
    const Jet v[1] = {Jet::variable(layout, 0, 3.0)};
    const int a1[1] = {1};
    CHECK(e(std::span<const Jet>(v, 1)).derivative(a1) ==
          doctest::Approx(std::cos(std::log(M_E + 3.0)) / (M_E + 3.0)));
    CHECK(Expr::parse("-2^2", {}).operator()(std::span<const double>()) == doctest::Approx(-4.0));
    CHECK(Expr::parse("2^3^2", {}).operator()(std::span<const double>()) == doctest::Approx(512.0));
    CHECK(Expr::parse("norm(3, 4)", {}).operator()(std::span<const double>()) == doctest::Approx(5.0));
    CHECK_THROWS_AS(Expr::parse("foo + 1", {"t"}), ValidationError);
    CHECK_THROWS_AS(Expr::parse("(1 + t", {"t"}), ValidationError);
    CHECK(e.independent_of("x"));
    CHECK_FALSE(e.independent_of("t"));
}

TEST_CASE("Gauss-Legendre rules integrate polynomials exactly") {
    for (int n : {1, 4, 10, 16}) {
        const double v = integrate_panels([n](double x) { return std::pow(x, 2 * n - 1) + std::pow(x, 2 * n - 2); },
                                          0.0, 1.0, 1, n);
        CHECK(v == doctest::Approx(1.0 / (2 * n) + 1.0 / (2 * n - 1)).epsilon(1e-13));
    }
}

TEST_CASE("Fornberg weights recover the classical central stencils") {
    const auto w = finite_difference_weights(2, central_offsets(2, 2));
    REQUIRE(w.size() == 3);
    CHECK(w[0] == doctest::Approx(1.0));
    CHECK(w[1] == doctest::Approx(-2.0));
    CHECK(w[2] == doctest::Approx(1.0));
    const auto w4 = finite_difference_weights(1, central_offsets(1, 4));
    REQUIRE(w4.size() == 5);
    CHECK(w4[0] == doctest::Approx(1.0 / 12));
    CHECK(w4[1] == doctest::Approx(-8.0 / 12));
}

TEST_CASE("adaptive node set integrates a peaked function") {
    auto f = [](double x) { return 1.0 / (1e-4 + x * x); };
    const NodeSet s = adaptive_node_set(f, -1.0, 1.0, 1e-12, 1e-12);
    double sum = 0.0;
    for (std::size_t i = 0; i < s.nodes.size(); ++i) sum += s.weights[i] * f(s.nodes[i]);
    CHECK(sum == doctest::Approx(2.0 / 1e-2 * std::atan(1.0 / 1e-2)).epsilon(1e-10));
}
