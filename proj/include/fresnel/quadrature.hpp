#pragma once

#include <cmath>
#include <functional>
#include <vector>

namespace fresnel {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Cached n-point Gauss-Legendre rule (Newton iteration on P_n).
const GaussRule& gauss_legendre(int n);

/// Composite rule: `panels` equal panels of `points`-point Gauss-Legendre on [a, b].
template <class F>
auto integrate_panels(F&& f, double a, double b, int panels, int points = 16) {
    const GaussRule& rule = gauss_legendre(points);
    const double h = (b - a) / panels;
    using R = decltype(f(a));
    R sum{};
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            sum += rule.weights[i] * f(mid + 0.5 * h * rule.nodes[i]);
    }
    return sum * (0.5 * h);
}

/// Nodes and weights of a panel rule refined by local bisection until each
/// panel's 10-point estimate agrees with the sum over its halves.
struct NodeSet {
    std::vector<double> nodes;
    std::vector<double> weights;
};

NodeSet adaptive_node_set(const std::function<double(double)>& f, double a, double b, double rel_tol,
                          double abs_tol, int max_depth = 40);

/// Fornberg weights for the derivative of order `order` at 0 from the given offsets.
std::vector<double> finite_difference_weights(int order, const std::vector<double>& offsets);

/// Symmetric central stencil (integer offsets) of the requested accuracy.
std::vector<double> central_offsets(int derivative_order, int accuracy);

}  // namespace fresnel
