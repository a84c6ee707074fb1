#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "fresnel/phase.hpp"
#include "fresnel/surface.hpp"

namespace oracle {

using fresnel::Jet;
using fresnel::Mat;
using fresnel::Vec;

inline Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

// Local section derivatives of a polar curve r(theta) at theta0 from a
// least-squares polynomial fit in the local frame.
inline std::vector<double> polar_fit_derivatives(const std::function<double(double)>& r, double theta0,
                                                 int degree = 10) {
    auto curve = [&](double th) { return v2(r(th) * std::cos(th), r(th) * std::sin(th)); };
    const double e = 1e-5;
    Vec tangent = (curve(theta0 + e) - curve(theta0 - e)) / (2 * e);
    tangent.normalize();
    const Vec normal = v2(tangent[1], -tangent[0]);
    const Vec p = curve(theta0);
    const int samples = 81;
    const double w = 0.15;
    Mat A(samples, degree + 1);
    Vec b(samples);
    for (int i = 0; i < samples; ++i) {
        const double th = theta0 - w + 2 * w * i / (samples - 1);
        const Vec q = curve(th) - p;
        const double y = q.dot(tangent) / w;
        for (int j = 0; j <= degree; ++j) A(i, j) = std::pow(y, j);
        b[i] = q.dot(normal);
    }
    const Vec c = A.colPivHouseholderQr().solve(b);
    std::vector<double> d(static_cast<std::size_t>(degree) + 1);
    double fact = 1.0;
    for (int j = 0; j <= degree; ++j) {
        if (j > 0) fact *= j;
        d[static_cast<std::size_t>(j)] = std::abs(c[j]) * fact / std::pow(w, j);
    }
    return d;
}

inline int order_from_derivatives(const std::vector<double>& d, double threshold) {
    for (std::size_t j = 2; j < d.size(); ++j)
        if (d[j] >= threshold) return static_cast<int>(j);
    return static_cast<int>(d.size());
}

// Curve r = 1 / u(theta) with u = 1 + sum_k eps_k cos k theta + del_k sin k theta.
struct ConvexCurve {
    double eps[5] = {0, 0, 0, 0, 0};
    double del[5] = {0, 0, 0, 0, 0};

    double u(double th) const {
        double v = 1;
        for (int k = 1; k <= 4; ++k) v += eps[k] * std::cos(k * th) + del[k] * std::sin(k * th);
        return v;
    }
    double upp(double th) const {
        double v = 0;
        for (int k = 1; k <= 4; ++k) v -= k * k * (eps[k] * std::cos(k * th) + del[k] * std::sin(k * th));
        return v;
    }
    double radius(double th) const { return 1.0 / u(th); }

    fresnel::PhaseSpec phase() const {
        const ConvexCurve c = *this;
        auto value = [c](double, const Vec&, const Vec& xi) { return xi.norm() * c.u(std::atan2(xi[1], xi[0])); };
        auto jet = [c](double, const Vec&, std::span<const Jet> xi) {
            // cos k theta, sin k theta as Re / Im of ((xi1 + i xi2) / |xi|)^k.
            const Jet r = sqrt(xi[0] * xi[0] + xi[1] * xi[1]);
            Jet re = xi[0], im = xi[1];
            Jet out = r;
            for (int k = 1; k <= 4; ++k) {
                out = out + (c.eps[k] * re + c.del[k] * im) / ipow(r, k - 1);
                Jet nre = re * xi[0] - im * xi[1];
                im = re * xi[1] + im * xi[0];
                re = nre;
            }
            return out;
        };
        return fresnel::PhaseSpec::user_table(2, value, jet);
    }
};

// Random small perturbations of the circle with min(u + u'') >= 0.2.
inline std::vector<ConvexCurve> random_convex_curves(int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coef(-0.05, 0.05);
    std::vector<ConvexCurve> out;
    while (static_cast<int>(out.size()) < count) {
        ConvexCurve c;
        for (int k = 1; k <= 4; ++k) c.eps[k] = coef(rng), c.del[k] = coef(rng);
        double min_conv = 1e9;
        for (int k = 0; k < 720; ++k) min_conv = std::min(min_conv, c.u(k * M_PI / 360) + c.upp(k * M_PI / 360));
        if (min_conv >= 0.2) out.push_back(c);
    }
    return out;
}

// J0 by its power series; fine in long double for |x| <= 20.
inline double j0_series(double x) {
    long double term = 1.0L, sum = 1.0L;
    const long double q = -0.25L * x * x;
    for (int k = 1; k < 80; ++k) {
        term *= q / (static_cast<long double>(k) * k);
        sum += term;
    }
    return static_cast<double>(sum);
}

}  // namespace oracle
