#pragma once

// Phase functions phi(t, x, xi), 1-homogeneous in xi, together with
// amplitudes, time-dependent coefficient functions and the coefficient
// class checks T{l}, T_nu{l} and S{m1, m2}.

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fresnel/expr.hpp"
#include "fresnel/jet.hpp"

namespace fresnel {

using Vec = Eigen::VectorXd;

enum class PhaseKind { Euclidean, AnisotropicPower, Star, TimeAveraged, UserTable, Expression };
enum class DerivMode { Analytic, FiniteDifference };

std::string to_string(PhaseKind kind);

struct FiniteDifferenceOptions {
    double relative_step = 1e-3;  // h = relative_step * |xi| for |alpha| <= 2
    int accuracy = 4;             // 2 or 4
};

class PhaseSpec {
public:
    using ValueFn = std::function<double(double t, const Vec& x, const Vec& xi)>;
    using JetFn = std::function<Jet(double t, const Vec& x, std::span<const Jet> xi)>;

    static PhaseSpec euclidean(int n, double radius = 1.0);
    /// (sum_i xi_i^m)^(1/m), m even and >= 2.
    static PhaseSpec anisotropic_power(int n, int m);
    /// |xi| (1 + eps cos(k theta)) in the plane, written without atan2 as
    /// |xi| + eps Re((xi1 + i xi2)^k) / |xi|^(k-1).
    static PhaseSpec star(double eps, int k);
    /// Opaque callable; derivatives by finite differences.
    static PhaseSpec user_table(int n, ValueFn value, bool depends_on_t = false, bool depends_on_x = false,
                                FiniteDifferenceOptions fd = {});
    /// Callable with a Taylor-jet evaluator; derivatives are analytic.
    static PhaseSpec user_table(int n, ValueFn value, JetFn jet, bool depends_on_t = false,
                                bool depends_on_x = false);
    /// Expression in t, x1..xn, xi1..xin.
    static PhaseSpec expression(int n, const std::string& source);
    /// Assembles a phase from parts; used for derived phases such as time averages.
    static PhaseSpec from_parts(PhaseKind kind, int n, ValueFn value, JetFn jet, bool depends_on_t,
                                bool depends_on_x, std::string description);

    PhaseKind kind() const { return kind_; }
    int dimension() const { return n_; }
    bool depends_on_t() const { return depends_on_t_; }
    bool depends_on_x() const { return depends_on_x_; }
    DerivMode deriv_mode() const { return jet_ ? DerivMode::Analytic : DerivMode::FiniteDifference; }
    const FiniteDifferenceOptions& fd_options() const { return fd_; }
    const std::string& description() const { return description_; }

    /// Raw evaluation without domain checks (use eval_phase for the checked form).
    double operator()(double t, const Vec& x, const Vec& xi) const { return value_(t, x, xi); }
    Jet jet(double t, const Vec& x, std::span<const Jet> xi) const;
    bool has_jets() const { return static_cast<bool>(jet_); }

    /// Copy that ignores the jet evaluator and differentiates numerically.
    PhaseSpec with_finite_differences(FiniteDifferenceOptions fd = {}) const;

private:
    PhaseKind kind_ = PhaseKind::Euclidean;
    int n_ = 2;
    bool depends_on_t_ = false;
    bool depends_on_x_ = false;
    ValueFn value_;
    JetFn jet_;
    FiniteDifferenceOptions fd_;
    std::string description_;
};

/// phi(t, x, xi); xi = 0 is a domain error.
double eval_phase(const PhaseSpec& phase, double t, const Vec& x, const Vec& xi);

struct Derivative {
    double value = 0.0;
    double error_estimate = 0.0;  // zero in analytic mode
};

/// d_xi^alpha phi. Finite-difference mode supports |alpha| <= 6.
Derivative eval_phase_deriv(const PhaseSpec& phase, double t, const Vec& x, const Vec& xi,
                            std::span<const int> alpha);

Vec phase_gradient(const PhaseSpec& phase, double t, const Vec& x, const Vec& xi);

struct HomogeneityReport {
    double max_relative_deviation = 0.0;
    int samples = 0;
};

/// max |phi(lambda xi) - lambda phi(xi)| / (lambda phi(xi)) for lambda in {0.5, 2, 10}.
HomogeneityReport check_homogeneity(const PhaseSpec& phase, int sample_count, std::uint64_t seed = 1);

struct PhaseBounds {
    double lower = 0.0;
    double upper = 0.0;
    Vec argmin;
    Vec argmax;
};

/// min / max of phi over unit directions and the (t, x) grids.
PhaseBounds phase_bounds(const PhaseSpec& phase, const std::vector<Vec>& directions,
                         const std::vector<double>& t_grid, const std::vector<Vec>& x_grid);

/// Unit directions: n = 2 angles k * res; n = 3 polar/azimuth grid with the
/// given angular step; n = 1 is {+1, -1}.
std::vector<Vec> direction_grid(int n, double resolution_deg);

// ---------------------------------------------------------------------------
// Time-dependent coefficients

/// A scalar function of t with derivative access: exact through jets for
/// expressions and constants, Ridders-style finite differences for callables.
class TimeFunction {
public:
    TimeFunction() = default;
    static TimeFunction constant(double value);
    static TimeFunction expression(const std::string& source);
    static TimeFunction callable(std::function<double(double)> f, std::string description = "callable");

    double operator()(double t) const;
    /// f(t), f'(t), ..., f^(K)(t).
    std::vector<double> derivatives(double t, int order) const;
    bool exact_derivatives() const { return expr_.has_value() || is_constant_; }
    bool is_constant() const { return is_constant_; }
    const std::string& description() const { return description_; }

private:
    std::optional<Expr> expr_;
    std::function<double(double)> fn_;
    bool is_constant_ = true;
    double constant_ = 0.0;
    std::string description_ = "0";
};

// ---------------------------------------------------------------------------
// Amplitudes

class AmplitudeSpec {
public:
    using Fn = std::function<double(double t, const Vec& x, const Vec& xi)>;

    static AmplitudeSpec unit();
    static AmplitudeSpec constant(double value);
    /// Expression in t, x1..xn, xi1..xin.
    static AmplitudeSpec expression(int n, const std::string& source);
    static AmplitudeSpec callable(Fn fn, bool radial = false);

    /// Multiplies by a smooth cutoff equal to 0 for t|xi| <= C and 1 for t|xi| >= 2C.
    AmplitudeSpec with_cutoff(double c) const;
    double cutoff() const { return cutoff_; }

    double operator()(double t, const Vec& x, const Vec& xi) const;
    /// Value for a radial amplitude given t and |xi|.
    double radial(double t, double s) const;
    bool is_radial() const { return radial_; }
    bool depends_on_x() const { return depends_on_x_; }
    std::optional<double> constant_value() const { return constant_; }
    const std::string& description() const { return description_; }

    /// d_xi^alpha a, exact for expression/constant amplitudes, numeric otherwise.
    double derivative(double t, const Vec& x, const Vec& xi, std::span<const int> alpha) const;

    std::vector<double> seminorm_budget;  // optional C_alpha per order

private:
    Fn fn_;
    std::optional<Expr> expr_;
    std::optional<double> constant_;
    double cutoff_ = 0.0;
    bool radial_ = true;
    bool depends_on_x_ = false;
    int n_ = 0;
    std::string description_ = "unit";
};

/// Smooth step: 0 for u <= 0, 1 for u >= 1, C-infinity in between.
double smooth_step(double u);

struct SymbolEstimateReport {
    bool satisfied = true;
    std::vector<double> constants;  // per order |alpha|: sup |d^alpha a| <xi>^|alpha|
};

/// Samples |d_xi^alpha a| <= C_alpha <xi>^-|alpha| on directions x radii.
SymbolEstimateReport check_symbol_estimate(const AmplitudeSpec& amplitude, int max_order,
                                           const std::vector<Vec>& directions, const std::vector<double>& radii,
                                           double t, const Vec& x);

// ---------------------------------------------------------------------------
// Coefficient classes

enum class SymbolClassKind { T, TNu, S };

struct SymbolClassSpec {
    SymbolClassKind kind = SymbolClassKind::T;
    double ell = 0.0;  // order l of T{l} / T_nu{l}
    double nu = 0.0;   // in [0, 1]
    double m1 = 0.0;   // S{m1, m2}: homogeneity order in xi
    double m2 = 0.0;   //            time order
    int max_order = 3;     // K, time derivatives
    int max_xi_order = 1;  // xi derivatives for S{m1, m2}
    std::vector<double> t_grid;
    std::vector<Vec> xi_grid;  // S{m1, m2} only
    double growth_factor = 2.0;

    static std::vector<double> default_t_grid(double t_max);
};

struct SymbolClassReport {
    bool member = true;
    std::vector<double> constants;   // c_k: sup over grid of the ratio, k = 0..K
    std::vector<double> tail_sup;    // sup over t >= t_max / 10
    std::vector<double> prior_sup;   // sup over t <  t_max / 10
    std::vector<double> growth;      // sup over grid / sup over the first unit interval
    std::vector<double> witness_t;   // argmax of the ratio per k
    std::size_t grid_size = 0;
};

/// Weight <t log(e + t)^nu>.
double class_weight(double t, double nu);

SymbolClassReport check_symbol_class(const TimeFunction& f, const SymbolClassSpec& spec);
/// S{m1, m2}: |xi|^(|alpha| - m1) D_xi^alpha a(t, xi) in T{m2}, uniformly on the xi grid.
/// `symbol` is an expression in t, xi1..xin.
SymbolClassReport check_symbol_class(const Expr& symbol, int n, const SymbolClassSpec& spec);

}  // namespace fresnel
