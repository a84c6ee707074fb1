#include <doctest.h>

#include <cmath>
#include <random>

#include "fresnel/decay.hpp"
#include "fresnel/errors.hpp"

using namespace fresnel;

namespace {

DecaySeries synthetic(double exponent, double scale, const std::function<double(double)>& wobble, int count = 20) {
    DecaySeries s;
    for (double t : log_space(10.0, 1000.0, count)) s.add(t, scale * std::pow(t, exponent) * wobble(t));
    return s;
}

ContactReport contact(int gamma, int gamma0, bool convex) {
    ContactReport r;
    r.gamma = gamma;
    r.gamma0 = gamma0;
    r.convex = convex;
    return r;
}

Vec v1(double a) { return Vec::Constant(1, a); }

}  // namespace

TEST_CASE("measure_sup") {
    const std::vector<cplx> constant(10, cplx(-2.5, 0.0));
    CHECK(measure_sup(constant) == 2.5);
    std::vector<double> spike(50, 0.0);
    spike[17] = 3.5;
    CHECK(measure_sup(spike) == 3.5);
    CHECK_THROWS_AS(measure_sup(std::vector<double>{}), UsageError);
}

TEST_CASE("fit_decay on synthetic series") {
    auto one = [](double) { return 1.0; };
    auto f = fit_decay(synthetic(-0.5, 1.0, one));
    CHECK(f.exponent == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(f.residual <= 1e-12);
    CHECK(f.samples == 20);
    f = fit_decay(synthetic(-0.25, 3.0, [](double t) { return 1.0 + 0.01 * std::sin(std::log(t)); }));
    CHECK(std::abs(f.exponent + 0.25) <= 0.01);
    f = fit_decay(synthetic(0.0, 2.0, one));
    CHECK(std::abs(f.exponent) <= 1e-12);
    CHECK(f.constant == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    // Windows and errors.
    f = fit_decay(synthetic(-1.0, 1.0, one, 30), {20.0, 800.0});
    CHECK(f.t_min >= 20.0);
    CHECK(f.t_max <= 800.0);
    CHECK_THROWS_AS(fit_decay(synthetic(-1.0, 1.0, one, 7)), FitError);
    CHECK_THROWS_AS(fit_decay(synthetic(-1.0, 1.0, one), {10.0, 50.0}), FitError);
    DecaySeries bad = synthetic(-1.0, 1.0, one);
    bad.s[3] = 0.0;
    CHECK_THROWS_AS(fit_decay(bad), DataError);
    std::swap(bad.t[1], bad.t[2]);
    bad.s[3] = 1.0;
    CHECK_THROWS_AS(fit_decay(bad), DataError);
}

TEST_CASE("fit_decay recovers exponents under 1% noise") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> noise(-0.01, 0.01);
    for (double e : {-0.25, -0.5, -1.0})
        for (int trial = 0; trial < 20; ++trial) {
            const auto f = fit_decay(synthetic(e, 1.7, [&](double) { return 1.0 + noise(rng); }, 24));
            CHECK(std::abs(f.exponent - e) <= 0.01);
        }
}

TEST_CASE("predict_rate") {
    auto p = predict_rate(contact(2, 2, true), 2);
    CHECK(p.exponent == -0.5);
    CHECK(p.regularity == 1.5);
    p = predict_rate(contact(4, 2, true), 2);
    CHECK(p.exponent == -0.25);
    CHECK(p.regularity == 1.75);
    p = predict_rate(contact(3, 2, false), 2);
    CHECK(p.exponent == -0.5);
    CHECK(p.regularity == 1.5);
    CHECK(p.branch == "non-convex");
    p = predict_rate(contact(2, 2, true), 3);
    CHECK(p.exponent == -1.0);
    CHECK(p.regularity == 2.0);
    ContactReport unknown = contact(0, 0, false);
    unknown.inconclusive = true;
    CHECK(predict_rate(unknown, 2).inconclusive);
    // Convex prediction is never weaker than the generic one with gamma0 = gamma.
    for (int n : {2, 3, 4})
        for (int g : {2, 3, 4, 6})
            CHECK(predict_rate(contact(g, g, true), n).exponent <= predict_rate(contact(g, g, false), n).exponent);
}

TEST_CASE("lp_lq_rate") {
    auto r = lp_lq_rate(1.0, 2);
    CHECK(std::isinf(r.q));
    CHECK(r.exponent == -0.5);
    CHECK(r.regularity == 2.0);
    CHECK(r.endpoint);
    r = lp_lq_rate(2.0, 3);
    CHECK(r.q == 2.0);
    CHECK(r.exponent == 0.0);
    CHECK(r.regularity == 0.0);
    r = lp_lq_rate(4.0 / 3.0, 2);
    CHECK(r.q == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(r.exponent == doctest::Approx(-0.25).epsilon(1e-14));
    CHECK(r.regularity == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(lp_lq_rate(1.0, 2, 4).exponent == -0.25);
    CHECK_THROWS_AS(lp_lq_rate(1.5, 2, 4), CapabilityError);
    CHECK_THROWS_AS(lp_lq_rate(0.9, 2), DomainError);
    CHECK_THROWS_AS(lp_lq_rate(2.1, 2), DomainError);
    // pq = p + q throughout.
    for (double p : {1.1, 1.25, 1.5, 1.9}) {
        r = lp_lq_rate(p, 2);
        CHECK(p * r.q == doctest::Approx(p + r.q).epsilon(1e-14));
    }
}

TEST_CASE("L2 determinant condition") {
    const std::vector<double> ts{0.5, 1.0, 2.0};
    std::vector<Vec> xs;
    for (int i = 0; i <= 60; ++i) xs.push_back(v1(-3.0 + 0.1 * i));
    const std::vector<Vec> dirs{v1(1.0), v1(-1.0)};
    auto r = check_l2_conditions(PhaseSpec::euclidean(1), ts, xs, dirs);
    CHECK(r.c0 == 1.0);
    CHECK_FALSE(r.violated);

    // phi = |xi| (1 + eps sin x): det = 1 + t eps cos(x) sign(xi); t eps <= 0.5 keeps C0 >= 0.5.
    const auto mild = PhaseSpec::expression(1, "abs(xi1) * (1 + 0.1 * sin(x1))");
    r = check_l2_conditions(mild, {1.0, 3.0, 5.0}, xs, dirs);
    CHECK_FALSE(r.violated);
    CHECK(r.c0 >= 0.5);
    CHECK(std::abs(r.c0 - 0.5) <= 1e-6);  // attained at t = 5, x = 0, xi < 0
    CHECK(r.bounds.at("1,1") == doctest::Approx(0.5).epsilon(1e-5));
    CHECK(r.bounds.count("2,2") == 1);

    r = check_l2_conditions(mild, {20.0}, xs, dirs);
    CHECK(r.violated);
    CHECK(r.sign_change);
    CHECK(r.c0 == 0.0);
    CHECK(r.witness_t == 20.0);

    // 2D: phi = |xi| + eps x1 xi2 -> det = 1 - (t eps)^2 ... for the mixed block.
    const auto shear = PhaseSpec::expression(2, "norm(xi1, xi2) + 0.2 * sin(x1) * xi2 + 0.2 * sin(x2) * xi1");
    std::vector<Vec> xs2;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) {
            Vec x(2);
            x << -1.5 + 0.4 * i, -1.5 + 0.4 * j;
            xs2.push_back(x);
        }
    const auto r2 = check_l2_conditions(shear, {1.0}, xs2, direction_grid(2, 45.0));
    // det [[1, 0.2 cos x1], [0.2 cos x2, 1]] = 1 - 0.04 cos x1 cos x2 >= 0.96.
    CHECK(r2.c0 == doctest::Approx(0.96).epsilon(1e-3));
}

TEST_CASE("L2 uniformity") {
    std::vector<GriddedField> tests;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) tests.push_back(random_band_limited(2, 40.0, 32, 3.0, seed));
    const auto ts = log_space(1.0, 100.0, 7);
    const auto unitary = check_l2_uniformity(normalized_fio(PhaseSpec::anisotropic_power(2, 4), AmplitudeSpec::unit()), tests, ts);
    CHECK(std::abs(unitary.max_ratio - 1.0) <= 1e-10);
    CHECK(std::abs(unitary.min_ratio - 1.0) <= 1e-10);
    CHECK(unitary.max_ratio / unitary.min_ratio <= 1.0 + 1e-9);

    // sup |a| = 0.7 attained on the data's band.
    const auto damped = AmplitudeSpec::expression(2, "0.7 / (1 + 0.1 * (xi1^2 + xi2^2))");
    const auto r = check_l2_uniformity(normalized_fio(PhaseSpec::euclidean(2), damped), tests, ts);
    CHECK(r.max_ratio <= 0.7 + 1e-10);
    CHECK(r.max_ratio >= 0.3);
    CHECK_THROWS_AS(check_l2_uniformity(normalized_fio(PhaseSpec::euclidean(2), damped), {GriddedField(2, 40.0, 32)}, ts),
                    UsageError);
}

TEST_CASE("sampling helpers") {
    const auto pts = ray_points(10.0, 16, 400);
    CHECK(pts.size() == 6400);
    CHECK(pts[399].norm() == doctest::Approx(10.0));
    CHECK(pts[400].norm() == 0.0);
    const double e = envelope_sup([](double r) { return std::abs(std::cyl_bessel_j(0.0, r)); }, 100.0);
    CHECK(e == doctest::Approx(std::sqrt(2.0 / (M_PI * 100.0))).epsilon(0.02));
    const auto ls = log_space(10.0, 500.0, 5);
    CHECK(ls.front() == 10.0);
    CHECK(ls.back() == 500.0);
}
