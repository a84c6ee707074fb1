#pragma once

// Truncated multivariate Taylor arithmetic.
//
// A Jet stores the Taylor coefficients c_alpha = d^alpha f / alpha! of a
// function of `nvars` variables up to total degree `order`. Arithmetic and
// the elementary functions propagate these coefficients exactly (up to
// rounding), which gives derivatives of any order without step-size
// selection. Generic numeric code is written as templates over a scalar
// type S that is either double or Jet.

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace fresnel {

class JetLayout {
public:
    struct Product {
        std::uint32_t lhs;
        std::uint32_t rhs;
        std::uint32_t out;
    };

    /// Shared, cached layout for the given variable count and order.
    static std::shared_ptr<const JetLayout> get(int nvars, int order);

    JetLayout(int nvars, int order);

    int nvars() const { return nvars_; }
    int order() const { return order_; }
    std::size_t size() const { return exponents_.size(); }
    std::span<const int> exponents(std::size_t idx) const {
        return {exponents_[idx].data(), exponents_[idx].size()};
    }
    int degree(std::size_t idx) const { return degree_[idx]; }
    std::size_t index(std::span<const int> alpha) const;
    std::size_t unit_index(int var) const { return unit_[static_cast<std::size_t>(var)]; }
    const std::vector<Product>& products() const { return products_; }

private:
    int nvars_;
    int order_;
    std::vector<std::vector<int>> exponents_;
    std::vector<int> degree_;
    std::vector<std::int32_t> dense_;  // encoded multi-index -> position, -1 if absent
    std::vector<std::size_t> unit_;
    std::vector<Product> products_;
};

class Jet {
public:
    Jet() = default;
    Jet(std::shared_ptr<const JetLayout> layout, double value);

    /// The coordinate function x_var expanded around `value`.
    static Jet variable(std::shared_ptr<const JetLayout> layout, int var, double value);

    const std::shared_ptr<const JetLayout>& layout() const { return layout_; }
    double value() const { return c_[0]; }
    std::span<const double> coefficients() const { return c_; }
    std::span<double> coefficients() { return c_; }
    double coefficient(std::span<const int> alpha) const;
    /// d^alpha f at the expansion point (alpha! times the coefficient).
    double derivative(std::span<const int> alpha) const;

    Jet& operator+=(const Jet& o);
    Jet& operator-=(const Jet& o);
    Jet& operator*=(const Jet& o);
    Jet& operator/=(const Jet& o);
    Jet& operator+=(double v) { c_[0] += v; return *this; }
    Jet& operator-=(double v) { c_[0] -= v; return *this; }
    Jet& operator*=(double v);
    Jet& operator/=(double v) { return *this *= 1.0 / v; }

    /// Sum_k coeffs[k] (this - value)^k; coeffs are Taylor coefficients of an
    /// outer univariate function at this->value().
    Jet compose(std::span<const double> coeffs) const;

private:
    std::shared_ptr<const JetLayout> layout_;
    std::vector<double> c_;
};

Jet operator-(const Jet& a);
Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet operator+(Jet a, double b);
Jet operator+(double a, Jet b);
Jet operator-(Jet a, double b);
Jet operator-(double a, const Jet& b);
Jet operator*(Jet a, double b);
Jet operator*(double a, Jet b);
Jet operator/(Jet a, double b);
Jet operator/(double a, const Jet& b);

Jet sqrt(const Jet& a);
Jet pow(const Jet& a, double p);
Jet pow(const Jet& a, int p);
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet abs(const Jet& a);

inline double value_of(double v) { return v; }
inline double value_of(const Jet& v) { return v.value(); }

inline double constant_like(double, double v) { return v; }
inline Jet constant_like(const Jet& ref, double v) { return Jet(ref.layout(), v); }

/// Integer power by repeated multiplication; valid for any sign of the base.
template <class S>
S ipow(const S& base, int p) {
    if (p < 0) return constant_like(base, 1.0) / ipow(base, -p);
    S result = constant_like(base, 1.0);
    S b = base;
    while (p > 0) {
        if (p & 1) result = result * b;
        p >>= 1;
        if (p > 0) b = b * b;
    }
    return result;
}

/// Taylor coefficients of t -> f(rho) given a univariate jet f in rho.
std::vector<double> taylor_coefficients(const Jet& univariate);

}  // namespace fresnel
