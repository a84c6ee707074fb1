#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "fresnel/errors.hpp"
#include "fresnel/surface.hpp"
#include "oracles.hpp"

using namespace fresnel;

namespace {

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

using oracle::order_from_derivatives;
using oracle::polar_fit_derivatives;

PhaseSpec rotated(const PhaseSpec& base, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    auto value = [base, c, s](double t, const Vec& x, const Vec& xi) {
        return base(t, x, v2(c * xi[0] - s * xi[1], s * xi[0] + c * xi[1]));
    };
    auto jet = [base, c, s](double t, const Vec& x, std::span<const Jet> xi) {
        const Jet r[2] = {c * xi[0] - s * xi[1], s * xi[0] + c * xi[1]};
        return base.jet(t, x, std::span<const Jet>(r, 2));
    };
    return PhaseSpec::user_table(2, value, jet);
}

}  // namespace

TEST_CASE("radial_solve examples") {
    const Vec p = radial_solve(PhaseSpec::euclidean(2), v2(0, 1));
    CHECK(p[0] == doctest::Approx(0.0));
    CHECK(p[1] == doctest::Approx(1.0));
    const Vec q = radial_solve(PhaseSpec::anisotropic_power(2, 4), v2(1, 1) / std::sqrt(2.0));
    CHECK(q[0] == doctest::Approx(0.8408964152537145).epsilon(1e-12));
    CHECK(q[1] == doctest::Approx(0.8408964152537145).epsilon(1e-12));
    const Vec s = radial_solve(PhaseSpec::star(0.3, 3), v2(1, 0));
    CHECK(s.norm() == doctest::Approx(1.0 / 1.3).epsilon(1e-12));
    CHECK(std::abs(eval_phase(PhaseSpec::star(0.3, 3), 0, Vec::Zero(2), s) - 1.0) <= 1e-12);
    const auto neg = PhaseSpec::user_table(2, [](double, const Vec&, const Vec& xi) { return -xi.norm(); });
    CHECK_THROWS_AS(radial_solve(neg, v2(1, 0)), HypothesisViolation);
}

TEST_CASE("local_graph heights against closed forms") {
    const auto circle = local_graph(PhaseSpec::euclidean(2), v2(0, 1), 0.5);
    CHECK(circle.height(Vec::Constant(1, 0.3)) == doctest::Approx(std::sqrt(0.91) - 1.0).epsilon(1e-12));
    CHECK(circle.height(Vec::Constant(1, 0.0)) == doctest::Approx(0.0).scale(1.0));
    const auto quartic = local_graph(PhaseSpec::anisotropic_power(2, 4), v2(0, 1), 0.3);
    CHECK(quartic.height(Vec::Constant(1, 0.3)) == doctest::Approx(std::pow(1 - 0.0081, 0.25) - 1.0).epsilon(1e-10));
    for (double y : {-0.3, -0.1, 0.2, 0.3}) {
        const Vec q = quartic.point(Vec::Constant(1, y));
        CHECK(std::abs(eval_phase(PhaseSpec::anisotropic_power(2, 4), 0, Vec::Zero(2), q) - 1.0) <= 1e-9);
    }
    // Patch invariants h(0) = 0, grad h(0) = 0.
    CHECK(std::abs(quartic.taylor()[0]) <= 1e-9);
    CHECK(std::abs(quartic.taylor()[1]) <= 1e-9);
    CHECK_THROWS_AS(local_graph(PhaseSpec::euclidean(2), v2(0, 1.1), 0.5), UsageError);
    CHECK_THROWS_AS(circle.height(Vec::Constant(1, 3.0)), PatchRadiusError);
}

TEST_CASE("section_contact examples") {
    const Vec w = Vec::Constant(1, 1.0);
    auto s = section_contact(local_graph(PhaseSpec::euclidean(2), v2(0.6, 0.8), 0.5), w, 8);
    CHECK(s.order == 2);
    CHECK(s.leading == doctest::Approx(1.0).epsilon(1e-12));
    s = section_contact(local_graph(PhaseSpec::anisotropic_power(2, 4), v2(0, 1), 0.3), w, 8);
    CHECK(s.order == 4);
    CHECK(s.leading == doctest::Approx(6.0).epsilon(1e-10));
    Vec p3(3);
    p3 << 0, 0, 2;
    Vec w2(2);
    w2 << std::cos(0.7), std::sin(0.7);
    s = section_contact(local_graph(PhaseSpec::euclidean(3, 2.0), p3, 0.5), w2, 8);
    CHECK(s.order == 2);
    CHECK(s.leading == doctest::Approx(0.5).epsilon(1e-12));
    // Oracle: polynomial fit on the quartic at the axis point.
    const auto d = polar_fit_derivatives(
        [](double th) { return std::pow(std::pow(std::cos(th), 4) + std::pow(std::sin(th), 4), -0.25); }, M_PI / 2);
    CHECK(order_from_derivatives(d, 1e-3) == 4);
    CHECK(d[4] == doctest::Approx(6.0).epsilon(1e-3));
}

TEST_CASE("point_indices examples") {
    const auto grid2 = omega_grid(2);
    auto r = point_indices(local_graph(PhaseSpec::euclidean(2), v2(1, 0), 0.5), grid2, 8);
    CHECK(r.gamma_sup == 2);
    CHECK(r.gamma_inf == 2);
    CHECK(r.kappa == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.kappa0 == doctest::Approx(1.0).epsilon(1e-12));
    r = point_indices(local_graph(PhaseSpec::anisotropic_power(2, 4), v2(0, 1), 0.3), grid2, 8);
    CHECK(r.gamma_sup == 4);
    CHECK(r.kappa == doctest::Approx(6.0).epsilon(1e-10));
    Vec p(3);
    p << 1, 2, -2;
    p /= 3.0;
    r = point_indices(local_graph(PhaseSpec::euclidean(3), p, 0.5), omega_grid(3, 72), 8);
    CHECK(r.gamma_sup == 2);
    CHECK(r.gamma_inf == 2);
    CHECK(r.kappa == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("global_indices on builtin curves") {
    auto rep = global_indices(PhaseSpec::euclidean(2));
    CHECK(rep.gamma == 2);
    CHECK(rep.gamma0 == 2);
    CHECK(std::abs(rep.kappa - 1.0) <= 1e-6);
    CHECK(std::abs(rep.kappa0 - 1.0) <= 1e-6);
    CHECK(rep.convex);
    CHECK(rep.point_count == 360);

    rep = global_indices(PhaseSpec::anisotropic_power(2, 4));
    CHECK(rep.gamma == 4);
    CHECK(rep.gamma0 == 4);
    CHECK(rep.convex);
    int flat = 0;
    for (const auto& pt : rep.points)
        if (pt.gamma_sup == 4) {
            ++flat;
            CHECK(std::abs(pt.min_curvature) <= 1e-9);
        }
    CHECK(flat == 4);

    rep = global_indices(PhaseSpec::star(0.3, 3));
    CHECK_FALSE(rep.convex);
    CHECK(rep.gamma0 == 2);
    CHECK(rep.curvature_sign_changes == 6);
    CHECK(rep.gamma0 <= rep.gamma);

    SurfaceSampling refine;
    refine.refine_inflections = true;
    rep = global_indices(PhaseSpec::star(0.3, 3), refine);
    CHECK(rep.gamma == 3);
    CHECK(rep.gamma0 == 3);
    CHECK(rep.point_count == 366);
}

TEST_CASE("star curvature changes sign (oracle from the polar formula)") {
    // kappa = (r^2 + 2 r'^2 - r r'') / (r^2 + r'^2)^{3/2} for r = 1 / (1 + 0.3 cos 3 theta)
    int negative = 0;
    for (int k = 0; k < 360; ++k) {
        const double th = k * M_PI / 180, c = std::cos(3 * th), s = std::sin(3 * th);
        const double r = 1 / (1 + 0.3 * c);
        const double rp = 0.9 * s * r * r;
        const double rpp = 2.7 * c * r * r + 2 * 0.9 * s * r * rp;
        if (r * r + 2 * rp * rp - r * rpp < 0) ++negative;
    }
    CHECK(negative > 0);
    CHECK_FALSE(convexity_check(PhaseSpec::star(0.3, 3)).convex);
}

TEST_CASE("sphere dilation law and convexity") {
    for (double r : {0.5, 1.0, 2.0}) {
        const auto rep = global_indices(PhaseSpec::euclidean(3, r));
        CHECK(rep.gamma == 2);
        CHECK(rep.gamma0 == 2);
        CHECK(rep.kappa == doctest::Approx(1.0 / r).epsilon(0.01));
        CHECK(rep.convex);
    }
    const auto c = convexity_check(PhaseSpec::euclidean(3));
    CHECK(c.convex);
    CHECK(c.min_curvature == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(convexity_check(PhaseSpec::anisotropic_power(2, 4)).convex);
}

TEST_CASE("rotation invariance of the indices") {
    for (const auto& base : {PhaseSpec::euclidean(2), PhaseSpec::anisotropic_power(2, 4), PhaseSpec::star(0.3, 3)}) {
        const auto a = global_indices(base);
        const auto b = global_indices(rotated(base, M_PI / 6));
        CHECK(a.gamma == b.gamma);
        CHECK(a.gamma0 == b.gamma0);
        CHECK(a.kappa == doctest::Approx(b.kappa).epsilon(1e-6));
        CHECK(a.kappa0 == doctest::Approx(b.kappa0).epsilon(1e-6));
        CHECK(a.convex == b.convex);
    }
}

TEST_CASE("kappa never exceeds any section sum") {
    const auto rep = global_indices(PhaseSpec::anisotropic_power(3, 4), SurfaceSampling{10.0});
    CHECK(rep.gamma == 4);
    CHECK(rep.gamma0 >= 2);
    CHECK(rep.gamma0 <= rep.gamma);
    for (const auto& pt : rep.points) {
        const auto patch = local_graph(PhaseSpec::anisotropic_power(3, 4), pt.point, 0.25 * pt.point.norm());
        for (const Vec& w : omega_grid(3, 72)) {
            const auto s = section_contact(patch, w, 8);
            double sum = 0;
            for (int j = 2; j <= rep.gamma; ++j) sum += s.d[static_cast<std::size_t>(j)];
            CHECK(rep.kappa <= sum + 1e-12);
        }
    }
}

TEST_CASE("finite-difference phases fall back to polynomial fits") {
    const auto fd = PhaseSpec::anisotropic_power(2, 4).with_finite_differences();
    const auto s = section_contact(local_graph(fd, v2(0, 1), 0.25), Vec::Constant(1, 1.0), 6, 1e-5);
    CHECK(s.order == 4);
    CHECK(s.leading == doctest::Approx(6.0).epsilon(1e-3));
    const auto c = section_contact(local_graph(PhaseSpec::euclidean(2).with_finite_differences(), v2(0.6, 0.8), 0.25),
                                   Vec::Constant(1, 1.0), 6, 1e-5);
    CHECK(c.order == 2);
    CHECK(c.leading == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("randomized convex perturbations agree with the polynomial-fit oracle") {
    int agreements = 0, compared = 0;
    for (const auto& curve : oracle::random_convex_curves(20, 2024)) {
        const auto rep = global_indices(curve.phase(), SurfaceSampling{10.0});
        for (const auto& pt : rep.points) {
            const double th = std::atan2(pt.direction[1], pt.direction[0]);
            const auto d = polar_fit_derivatives([&](double a) { return curve.radius(a); }, th);
            ++compared;
            if (order_from_derivatives(d, 1e-3) == pt.gamma_sup) ++agreements;
        }
        CHECK(rep.convex);
    }
    CHECK(compared == 20 * 36);
    CHECK(agreements == compared);
}
