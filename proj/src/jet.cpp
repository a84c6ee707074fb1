#include "fresnel/jet.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

#include "fresnel/errors.hpp"

namespace fresnel {

namespace {

void enumerate(int nvars, int degree, int var, std::vector<int>& current,
               std::vector<std::vector<int>>& out) {
    if (var == nvars - 1) {
        current[static_cast<std::size_t>(var)] = degree;
        out.push_back(current);
        return;
    }
    for (int d = degree; d >= 0; --d) {
        current[static_cast<std::size_t>(var)] = d;
        enumerate(nvars, degree - d, var + 1, current, out);
    }
}

std::size_t encode(std::span<const int> alpha, int base) {
    std::size_t code = 0;
    for (int a : alpha) code = code * static_cast<std::size_t>(base) + static_cast<std::size_t>(a);
    return code;
}

}  // namespace

JetLayout::JetLayout(int nvars, int order) : nvars_(nvars), order_(order) {
    if (nvars < 1 || order < 0) throw UsageError("jet layout needs nvars >= 1 and order >= 0");
    std::vector<int> current(static_cast<std::size_t>(nvars), 0);
    for (int d = 0; d <= order; ++d) enumerate(nvars, d, 0, current, exponents_);
    std::size_t dense_size = 1;
    for (int v = 0; v < nvars; ++v) dense_size *= static_cast<std::size_t>(order + 1);
    dense_.assign(dense_size, -1);
    degree_.reserve(exponents_.size());
    for (std::size_t i = 0; i < exponents_.size(); ++i) {
        int deg = 0;
        for (int a : exponents_[i]) deg += a;
        degree_.push_back(deg);
        dense_[encode(exponents_[i], order + 1)] = static_cast<std::int32_t>(i);
    }
    unit_.resize(static_cast<std::size_t>(nvars), 0);
    if (order >= 1) {
        for (int v = 0; v < nvars; ++v) {
            std::vector<int> e(static_cast<std::size_t>(nvars), 0);
            e[static_cast<std::size_t>(v)] = 1;
            unit_[static_cast<std::size_t>(v)] = index(e);
        }
    }
    std::vector<int> sum(static_cast<std::size_t>(nvars));
    for (std::size_t i = 0; i < exponents_.size(); ++i) {
        for (std::size_t j = 0; j < exponents_.size(); ++j) {
            if (degree_[i] + degree_[j] > order) continue;
            for (std::size_t v = 0; v < sum.size(); ++v) sum[v] = exponents_[i][v] + exponents_[j][v];
            products_.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                                 static_cast<std::uint32_t>(index(sum))});
        }
    }
}

std::shared_ptr<const JetLayout> JetLayout::get(int nvars, int order) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::shared_ptr<const JetLayout>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{nvars, order}];
    if (!slot) slot = std::make_shared<const JetLayout>(nvars, order);
    return slot;
}

std::size_t JetLayout::index(std::span<const int> alpha) const {
    if (static_cast<int>(alpha.size()) != nvars_) throw UsageError("multi-index has wrong length");
    int deg = 0;
    for (int a : alpha) {
        if (a < 0) throw UsageError("negative multi-index entry");
        deg += a;
    }
    if (deg > order_) throw CapabilityError("multi-index exceeds jet order");
    return static_cast<std::size_t>(dense_[encode(alpha, order_ + 1)]);
}

Jet::Jet(std::shared_ptr<const JetLayout> layout, double value)
    : layout_(std::move(layout)), c_(layout_->size(), 0.0) {
    c_[0] = value;
}

Jet Jet::variable(std::shared_ptr<const JetLayout> layout, int var, double value) {
    Jet j(layout, value);
    if (layout->order() >= 1) j.c_[layout->unit_index(var)] = 1.0;
    return j;
}

double Jet::coefficient(std::span<const int> alpha) const { return c_[layout_->index(alpha)]; }

double Jet::derivative(std::span<const int> alpha) const {
    double factorial = 1.0;
    for (int a : alpha)
        for (int k = 2; k <= a; ++k) factorial *= k;
    return factorial * coefficient(alpha);
}

Jet& Jet::operator+=(const Jet& o) {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
}

Jet& Jet::operator-=(const Jet& o) {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
}

Jet& Jet::operator*=(double v) {
    for (double& c : c_) c *= v;
    return *this;
}

Jet& Jet::operator*=(const Jet& o) {
    *this = *this * o;
    return *this;
}

Jet& Jet::operator/=(const Jet& o) {
    *this = *this / o;
    return *this;
}

Jet Jet::compose(std::span<const double> coeffs) const {
    Jet v = *this;
    v.c_[0] = 0.0;
    Jet r(layout_, coeffs.back());
    for (std::size_t k = coeffs.size() - 1; k-- > 0;) {
        r = r * v;
        r.c_[0] += coeffs[k];
    }
    return r;
}

Jet operator-(const Jet& a) { return a * -1.0; }
Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }

Jet operator*(const Jet& a, const Jet& b) {
    Jet r(a.layout(), 0.0);
    auto out = r.coefficients();
    auto x = a.coefficients();
    auto y = b.coefficients();
    for (const auto& p : a.layout()->products()) out[p.out] += x[p.lhs] * y[p.rhs];
    return r;
}

Jet operator/(const Jet& a, const Jet& b) {
    const int order = b.layout()->order();
    const double b0 = b.value();
    if (b0 == 0.0) throw DomainError("jet division by a series with zero constant term");
    std::vector<double> f(static_cast<std::size_t>(order) + 1);
    double p = 1.0 / b0;
    for (int k = 0; k <= order; ++k) {
        f[static_cast<std::size_t>(k)] = (k % 2 == 0 ? p : -p);
        p /= b0;
    }
    return a * b.compose(f);
}

Jet operator+(Jet a, double b) { return a += b; }
Jet operator+(double a, Jet b) { return b += a; }
Jet operator-(Jet a, double b) { return a -= b; }
Jet operator-(double a, const Jet& b) { return -b + a; }
Jet operator*(Jet a, double b) { return a *= b; }
Jet operator*(double a, Jet b) { return b *= a; }
Jet operator/(Jet a, double b) { return a /= b; }
Jet operator/(double a, const Jet& b) { return Jet(b.layout(), a) / b; }

Jet pow(const Jet& a, double p) {
    const double a0 = a.value();
    if (a0 <= 0.0) throw DomainError("jet pow requires a positive base");
    const int order = a.layout()->order();
    std::vector<double> f(static_cast<std::size_t>(order) + 1);
    double binom = 1.0;
    for (int k = 0; k <= order; ++k) {
        f[static_cast<std::size_t>(k)] = binom * std::pow(a0, p - k);
        binom *= (p - k) / (k + 1);
    }
    return a.compose(f);
}

Jet pow(const Jet& a, int p) { return ipow(a, p); }

Jet sqrt(const Jet& a) { return pow(a, 0.5); }

Jet exp(const Jet& a) {
    const int order = a.layout()->order();
    std::vector<double> f(static_cast<std::size_t>(order) + 1);
    double e = std::exp(a.value());
    for (int k = 0; k <= order; ++k) {
        f[static_cast<std::size_t>(k)] = e;
        e /= (k + 1);
    }
    return a.compose(f);
}

Jet log(const Jet& a) {
    const double a0 = a.value();
    if (a0 <= 0.0) throw DomainError("jet log requires a positive argument");
    const int order = a.layout()->order();
    std::vector<double> f(static_cast<std::size_t>(order) + 1);
    f[0] = std::log(a0);
    double p = 1.0 / a0;
    for (int k = 1; k <= order; ++k) {
        f[static_cast<std::size_t>(k)] = (k % 2 == 1 ? p : -p) / k;
        p /= a0;
    }
    return a.compose(f);
}

namespace {

Jet trig(const Jet& a, double shift) {
    const int order = a.layout()->order();
    std::vector<double> f(static_cast<std::size_t>(order) + 1);
    double fact = 1.0;
    for (int k = 0; k <= order; ++k) {
        if (k > 0) fact *= k;
        f[static_cast<std::size_t>(k)] = std::sin(a.value() + shift + k * M_PI / 2.0) / fact;
    }
    return a.compose(f);
}

}  // namespace

Jet sin(const Jet& a) { return trig(a, 0.0); }
Jet cos(const Jet& a) { return trig(a, M_PI / 2.0); }

Jet abs(const Jet& a) {
    if (a.value() == 0.0) throw DomainError("jet abs is not smooth at zero");
    return a.value() > 0 ? a : -a;
}

std::vector<double> taylor_coefficients(const Jet& univariate) {
    if (univariate.layout()->nvars() != 1) throw UsageError("expected a univariate jet");
    auto c = univariate.coefficients();
    return {c.begin(), c.end()};
}

}  // namespace fresnel
