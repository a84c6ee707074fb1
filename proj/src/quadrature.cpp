#include "fresnel/quadrature.hpp"

#include <map>
#include <memory>
#include <mutex>

#include "fresnel/errors.hpp"

namespace fresnel {

const GaussRule& gauss_legendre(int n) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<GaussRule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (slot) return *slot;
    if (n < 1) throw UsageError("Gauss-Legendre rule needs at least one node");
    auto rule = std::make_unique<GaussRule>();
    rule->nodes.resize(static_cast<std::size_t>(n));
    rule->weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        rule->nodes[static_cast<std::size_t>(i)] = -z;
        rule->nodes[static_cast<std::size_t>(n - 1 - i)] = z;
        rule->weights[static_cast<std::size_t>(i)] = w;
        rule->weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    slot = std::move(rule);
    return *slot;
}

namespace {

double panel_estimate(const std::function<double(double)>& f, double a, double b) {
    return integrate_panels(f, a, b, 1, 10);
}

void refine(const std::function<double(double)>& f, double a, double b, double whole, double rel_tol,
            double abs_tol, int depth, std::vector<std::pair<double, double>>& panels) {
    const double mid = 0.5 * (a + b);
    const double left = panel_estimate(f, a, mid);
    const double right = panel_estimate(f, mid, b);
    const double err = std::abs(left + right - whole);
    if (err <= std::max(abs_tol, rel_tol * std::abs(left + right)) || depth <= 0) {
        if (depth <= 0 && err > std::max(abs_tol, rel_tol * std::abs(left + right)))
            throw AccuracyError("adaptive node set did not converge", whole, left + right);
        panels.emplace_back(a, mid);
        panels.emplace_back(mid, b);
        return;
    }
    refine(f, a, mid, left, rel_tol, abs_tol * 0.5, depth - 1, panels);
    refine(f, mid, b, right, rel_tol, abs_tol * 0.5, depth - 1, panels);
}

}  // namespace

NodeSet adaptive_node_set(const std::function<double(double)>& f, double a, double b, double rel_tol,
                          double abs_tol, int max_depth) {
    std::vector<std::pair<double, double>> panels;
    // Start from a few panels so that narrow features are not skipped by the first estimate.
    const int initial = 8;
    const double h = (b - a) / initial;
    for (int p = 0; p < initial; ++p) {
        const double lo = a + p * h, hi = a + (p + 1) * h;
        refine(f, lo, hi, panel_estimate(f, lo, hi), rel_tol, abs_tol / initial, max_depth, panels);
    }
    const GaussRule& rule = gauss_legendre(10);
    NodeSet set;
    for (auto [lo, hi] : panels) {
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            set.nodes.push_back(mid + half * rule.nodes[i]);
            set.weights.push_back(half * rule.weights[i]);
        }
    }
    return set;
}

std::vector<double> finite_difference_weights(int order, const std::vector<double>& x) {
    // Fornberg (1988), expansion point 0.
    const int n = static_cast<int>(x.size()) - 1;
    std::vector<std::vector<double>> c(x.size(), std::vector<double>(static_cast<std::size_t>(order) + 1, 0.0));
    double c1 = 1.0, c4 = x[0];
    c[0][0] = 1.0;
    for (int i = 1; i <= n; ++i) {
        const int mn = std::min(i, order);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[static_cast<std::size_t>(i)];
        for (int j = 0; j < i; ++j) {
            const double c3 = x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
                        c1 * (k * c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k - 1)] -
                              c5 * c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k)]) / c2;
                c[static_cast<std::size_t>(i)][0] = -c1 * c5 * c[static_cast<std::size_t>(i - 1)][0] / c2;
            }
            for (int k = mn; k >= 1; --k)
                c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] =
                    (c4 * c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] -
                     k * c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k - 1)]) / c3;
            c[static_cast<std::size_t>(j)][0] = c4 * c[static_cast<std::size_t>(j)][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) w[i] = c[i][static_cast<std::size_t>(order)];
    return w;
}

std::vector<double> central_offsets(int derivative_order, int accuracy) {
    const int points = 2 * ((derivative_order + 1) / 2) - 1 + accuracy;
    const int half = (points - 1) / 2;
    std::vector<double> offsets;
    for (int i = -half; i <= half; ++i) offsets.push_back(i);
    return offsets;
}

}  // namespace fresnel
