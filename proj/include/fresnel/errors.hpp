#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fresnel {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Argument outside the domain of a smooth map (e.g. a phase evaluated at xi = 0).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Requested operation is not supported by the object (derivative order, mode, dimension).
class CapabilityError : public Error {
public:
    using Error::Error;
};

/// A hypothesis of an estimate (positivity, ellipticity, ...) fails on the sampling grid.
class HypothesisViolation : public Error {
public:
    using Error::Error;
};

/// Non-finite or otherwise unusable sample data.
class DataError : public Error {
public:
    using Error::Error;
};

/// Caller misuse: empty sets, bad parameters.
class UsageError : public Error {
public:
    using Error::Error;
};

/// Grid cannot represent the requested quantity.
class ResolutionError : public Error {
public:
    using Error::Error;
};

/// Local graph root finding left the patch; the caller should shrink the radius.
class PatchRadiusError : public Error {
public:
    using Error::Error;
};

/// Characteristic roots collide (or become complex) on the sampling grid.
class DistinctnessError : public Error {
public:
    DistinctnessError(const std::string& what, double t, std::vector<double> xi)
        : Error(what), t_(t), xi_(std::move(xi)) {}
    double witness_t() const { return t_; }
    const std::vector<double>& witness_xi() const { return xi_; }

private:
    double t_;
    std::vector<double> xi_;
};

/// Sorted-order root tracking saw a gap violation part way through an integration.
class TrackingError : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature did not stabilise; carries the last two estimates.
class AccuracyError : public Error {
public:
    AccuracyError(const std::string& what, double previous, double last)
        : Error(what), previous_(previous), last_(last) {}
    double previous() const { return previous_; }
    double last() const { return last_; }

private:
    double previous_;
    double last_;
};

/// ODE step-size control failed for some frequency.
class IntegrationError : public Error {
public:
    using Error::Error;
};

/// Least-squares decay fit has too few or too clustered samples.
class FitError : public Error {
public:
    using Error::Error;
};

/// Scenario document does not match the schema.
class ValidationError : public Error {
public:
    using Error::Error;
};

}  // namespace fresnel
